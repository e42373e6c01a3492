"""Word-pair similarity/relatedness evaluation with coverage reporting.

Embeddings are scored by the Spearman correlation between cosine
similarities and human gold scores. Pairs with an out-of-vocabulary word
are skipped and reported through the coverage fraction, never imputed.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from kbembed.embeddings import EmbeddingMatrix
from kbembed.vocab import normalize_word


class ZeroVectorError(ValueError):
    """Cosine similarity is undefined for a zero vector."""


@dataclass
class PairDataset:
    """Named list of (word_a, word_b, gold score) pairs."""

    name: str
    pairs: list[tuple[str, str, float]]

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class SimResult:
    rho: float
    n_scored: int
    coverage: float


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVectorError("cosine similarity undefined for zero vectors")
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); ties get the average of their positions."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i: j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(xs, ys) -> float:
    """Spearman rank correlation: Pearson over average-tie ranks."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("inputs must be equal-length 1-D sequences")
    if len(xs) < 2:
        raise ValueError("need at least 2 observations")
    if np.all(xs == xs[0]) or np.all(ys == ys[0]):
        raise ValueError("correlation undefined for a constant sequence")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    return float(np.corrcoef(rx, ry)[0, 1])


def evaluate_similarity(e: EmbeddingMatrix, d: PairDataset) -> SimResult:
    """Spearman of cosine vs gold over the in-vocabulary pairs."""
    golds, sims = [], []
    for word_a, word_b, gold in d.pairs:
        va = e.vector(normalize_word(word_a))
        vb = e.vector(normalize_word(word_b))
        if va is None or vb is None:
            continue
        try:
            sims.append(cosine(va, vb))
        except ZeroVectorError:
            continue
        golds.append(gold)
    if len(golds) < 2:
        raise ValueError(
            f"{d.name}: only {len(golds)} of {len(d.pairs)} pairs scored; "
            "cannot correlate"
        )
    return SimResult(
        rho=spearman(golds, sims),
        n_scored=len(golds),
        coverage=len(golds) / len(d.pairs),
    )


def load_pairs(path: str | Path, name: str | None = None) -> PairDataset:
    """Load a `word_a<TAB>word_b<TAB>score` TSV benchmark file."""
    path = Path(path)
    pairs: list[tuple[str, str, float]] = []
    seen: set[tuple[str, str]] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(
                    f"{path}, line {lineno}: expected 3 tab-separated fields, got {len(parts)}"
                )
            word_a = normalize_word(parts[0])
            word_b = normalize_word(parts[1])
            try:
                gold = float(parts[2])
            except ValueError:
                raise ValueError(f"{path}, line {lineno}: bad score {parts[2]!r}")
            if not np.isfinite(gold):
                raise ValueError(f"{path}, line {lineno}: non-finite score")
            key = (min(word_a, word_b), max(word_a, word_b))
            if key in seen:
                raise ValueError(f"{path}, line {lineno}: duplicate pair {key}")
            seen.add(key)
            pairs.append((word_a, word_b, gold))
    if not pairs:
        raise ValueError(f"{path}: empty benchmark file")
    return PairDataset(name=name or path.stem, pairs=pairs)
