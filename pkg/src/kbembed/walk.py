"""Random-walk pseudo-corpus generation over a lexical graph.

Each walk starts at a uniformly random node and, at every step, continues
to a weight-proportional random out-neighbor with probability ``alpha`` or
stops with probability ``1 - alpha``. Dead-end nodes and the length cap
also stop a walk. One walk is one "sentence" of the output corpus.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from kbembed.graph import LexicalGraph
from kbembed.vocab import Vocabulary


@dataclass
class WalkParams:
    alpha: float = 0.85
    token_budget: int = 20_000_000
    max_walk_len: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError(f"alpha must be in [0, 1), got {self.alpha}")
        if self.token_budget < 1:
            raise ValueError("token_budget must be positive")
        if self.max_walk_len < 1:
            raise ValueError("max_walk_len must be positive")


@dataclass
class WalkCorpus:
    """Walks as word-id sequences, plus the vocabulary they index into."""

    walks: list[np.ndarray]
    vocab: Vocabulary

    @property
    def n_tokens(self) -> int:
        return sum(len(w) for w in self.walks)


def _transition_tables(g: LexicalGraph) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Per-node out-neighbor ids and cumulative transition weights.

    Edge weights are summed over relation labels; transitions do not
    distinguish relation types.
    """
    totals: list[dict[int, float]] = [dict() for _ in range(len(g.vocab))]
    for (src, _rel, dst), w in g.edges.items():
        totals[src][dst] = totals[src].get(dst, 0.0) + w
    neighbors, cumweights = [], []
    for node_totals in totals:
        dsts = np.fromiter(node_totals.keys(), dtype=np.int64, count=len(node_totals))
        ws = np.fromiter(node_totals.values(), dtype=np.float64, count=len(node_totals))
        neighbors.append(dsts)
        cumweights.append(np.cumsum(ws))
    return neighbors, cumweights


def generate_walk_corpus(g: LexicalGraph, p: WalkParams) -> WalkCorpus:
    """Emit walks until at least ``token_budget`` tokens are produced.

    Identical parameters (seed included) yield an identical corpus.
    """
    n = len(g.vocab)
    if n == 0:
        raise ValueError("cannot walk an empty graph")
    neighbors, cumweights = _transition_tables(g)
    rng = np.random.default_rng(p.seed)

    walks: list[np.ndarray] = []
    tokens = 0
    while tokens < p.token_budget:
        node = int(rng.integers(n))
        walk = [node]
        while len(walk) < p.max_walk_len:
            dsts = neighbors[node]
            if len(dsts) == 0:
                break
            if rng.random() >= p.alpha:
                break
            cum = cumweights[node]
            node = int(dsts[np.searchsorted(cum, rng.random() * cum[-1], side="right")])
            walk.append(node)
        walks.append(np.asarray(walk, dtype=np.int64))
        tokens += len(walk)
    return WalkCorpus(walks=walks, vocab=g.vocab)


def save_corpus(corpus: WalkCorpus, path: str | Path) -> None:
    """Write one walk per line, space-separated words.

    Multi-word tokens are written with underscores so the corpus stays
    whitespace-delimited for external trainers.
    """
    with Path(path).open("w", encoding="utf-8") as fh:
        for walk in corpus.walks:
            fh.write(" ".join(corpus.vocab.word(i).replace(" ", "_") for i in walk))
            fh.write("\n")
