"""Predicting per-voxel fMRI activation from word embeddings.

A linear decoder maps each word's embedding to its voxel activation
vector. Training minimizes a composite of Huber loss, mean pairwise
squared error, and an L2 penalty on weights and bias. Evaluation is
leave-two-out: for every held-out word pair the predicted activations
must match the observed ones under summed cosine similarity. Voxels are
restricted to the most stable ones, recomputed per fold from training
words only.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from kbembed.embeddings import EmbeddingMatrix
from kbembed.vocab import normalize_word

_BINARY_MAGIC = b"KBFMRI1\n"


class FmriFormatError(ValueError):
    """Malformed fMRI data file."""


@dataclass
class FmriDataset:
    """Per-participant stimulus-word x voxel activations with repetitions.

    ``presentations[i]`` is a (repetitions, voxel_count) array for
    ``words[i]``.
    """

    participant_id: str
    words: list[str]
    presentations: list[np.ndarray]
    voxel_count: int
    grid_dims: tuple[int, int, int] | None = None
    grid_size: str = "unknown"

    def __post_init__(self) -> None:
        if len(self.words) != len(self.presentations):
            raise ValueError("words and presentations are misaligned")
        cleaned = []
        for word, pres in zip(self.words, self.presentations):
            arr = np.asarray(pres, dtype=np.float64).reshape(-1, self.voxel_count)
            if arr.shape[0] < 1:
                raise ValueError(f"word {word!r} has no presentations")
            cleaned.append(arr)
        self.presentations = cleaned

    @property
    def n_words(self) -> int:
        return len(self.words)

    def min_presentations(self) -> int:
        return min(p.shape[0] for p in self.presentations)


@dataclass
class DecoderParams:
    epochs: int = 1000
    batch_size: int = 29
    lr: float = 0.001
    huber_delta: float = 1.0
    l2_weight: float = 1e-4
    n_stable_voxels: int = 500
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        for name in ("batch_size", "lr", "huber_delta", "l2_weight", "n_stable_voxels"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class DecoderModel:
    """Linear map embedding -> voxel activations: pred = emb @ weights + bias."""

    weights: np.ndarray  # (dim, n_voxels)
    bias: np.ndarray     # (n_voxels,)

    def predict(self, emb: np.ndarray) -> np.ndarray:
        return np.asarray(emb) @ self.weights + self.bias


def representative_images(d: FmriDataset) -> dict[str, np.ndarray]:
    """Mean image per word, minus the across-word mean of those means.

    The output's across-word mean is the zero vector.
    """
    means = np.stack([p.mean(axis=0) for p in d.presentations])
    grand = means.mean(axis=0)
    return {word: means[i] - grand for i, word in enumerate(d.words)}


def voxel_stability(d: FmriDataset, training_words: list[str] | set[str]) -> np.ndarray:
    """Per-voxel consistency of the response profile across presentations.

    For each voxel, form its (presentations x training words) response
    matrix; stability is the mean pairwise Pearson correlation between
    the presentation rows. Pairs involving a constant row contribute 0.
    """
    word_idx = {w: i for i, w in enumerate(d.words)}
    train_ids = sorted(word_idx[w] for w in training_words)
    if not train_ids:
        raise ValueError("no training words given")
    reps = {d.presentations[i].shape[0] for i in train_ids}
    if min(reps) < 2:
        raise ValueError("stability selection needs >= 2 presentations per word")
    if len(reps) != 1:
        raise ValueError("stability selection needs a uniform presentation count")
    n_pres = reps.pop()

    # responses: (presentations, words, voxels)
    responses = np.stack([d.presentations[i][:n_pres] for i in train_ids], axis=1)
    centered = responses - responses.mean(axis=1, keepdims=True)
    std = centered.std(axis=1, keepdims=True)
    z = np.divide(centered, std, out=np.zeros_like(centered), where=std > 0)
    n_words = len(train_ids)
    # sum over presentation pairs of row correlations, per voxel
    total = z.sum(axis=0)
    cross = (np.einsum("wv,wv->v", total, total) - np.einsum("pwv,pwv->v", z, z)) / 2.0
    n_pairs = n_pres * (n_pres - 1) / 2.0
    return cross / n_words / n_pairs


def stable_voxels(d: FmriDataset, training_words: list[str] | set[str], n: int) -> np.ndarray:
    """Indices of the n most stable voxels; ties break toward the lower
    voxel index."""
    if n > d.voxel_count:
        raise ValueError(f"n={n} exceeds voxel count {d.voxel_count}")
    stability = voxel_stability(d, training_words)
    order = np.lexsort((np.arange(d.voxel_count), -stability))
    return np.sort(order[:n])


def top_variance_voxels(
    d: FmriDataset, training_words: list[str] | set[str], n: int
) -> np.ndarray:
    """Fallback selection for repetition-free data: highest variance of the
    mean image across training words."""
    if n > d.voxel_count:
        raise ValueError(f"n={n} exceeds voxel count {d.voxel_count}")
    word_idx = {w: i for i, w in enumerate(d.words)}
    train_ids = sorted(word_idx[w] for w in training_words)
    means = np.stack([d.presentations[i].mean(axis=0) for i in train_ids])
    variance = means.var(axis=0)
    order = np.lexsort((np.arange(d.voxel_count), -variance))
    return np.sort(order[:n])


def _huber(err: np.ndarray, delta: float) -> np.ndarray:
    abs_err = np.abs(err)
    return np.where(abs_err <= delta, 0.5 * err**2, delta * (abs_err - 0.5 * delta))


def combined_loss(
    pred: np.ndarray, target: np.ndarray, model: DecoderModel, p: DecoderParams
) -> float:
    """Huber + mean pairwise squared error + L2 on weights and bias.

    The pairwise term compares predicted and observed activation
    differences over all example pairs; a single-example batch
    contributes no pairs.
    """
    pred = np.atleast_2d(np.asarray(pred, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    huber = float(_huber(pred - target, p.huber_delta).mean())

    n = pred.shape[0]
    pairwise = 0.0
    if n > 1:
        err = pred - target
        # sum over i<j of ||err_i - err_j||^2 = n*sum||err_i||^2 - ||sum err_i||^2
        sq = float(np.einsum("bv,bv->", err, err))
        total = err.sum(axis=0)
        pair_sum = n * sq - float(total @ total)
        pairwise = pair_sum / (n * (n - 1) / 2.0) / pred.shape[1]
    l2 = p.l2_weight * (float(np.sum(model.weights**2)) + float(np.sum(model.bias**2)))
    return huber + pairwise + l2


def decoder_loss_grads(
    emb: np.ndarray, target: np.ndarray, model: DecoderModel, p: DecoderParams
) -> tuple[float, np.ndarray, np.ndarray]:
    """Combined loss plus analytic gradients w.r.t. weights and bias."""
    emb = np.atleast_2d(np.asarray(emb, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    pred = model.predict(emb)
    n, n_vox = pred.shape
    err = pred - target

    d_pred = np.clip(err, -p.huber_delta, p.huber_delta) / err.size
    if n > 1:
        n_pairs = n * (n - 1) / 2.0
        d_pred = d_pred + 2.0 * (n * err - err.sum(axis=0)) / (n_pairs * n_vox)
    d_weights = emb.T @ d_pred + 2.0 * p.l2_weight * model.weights
    d_bias = d_pred.sum(axis=0) + 2.0 * p.l2_weight * model.bias
    return combined_loss(pred, target, model, p), d_weights, d_bias


def train_decoder(
    e: EmbeddingMatrix,
    targets: dict[str, np.ndarray],
    p: DecoderParams,
    collect_losses: bool = False,
) -> DecoderModel | tuple[DecoderModel, list[float]]:
    """Mini-batch gradient descent on the combined loss.

    ``targets`` maps each training word to its (stable-voxel-restricted)
    activation vector. Deterministic given the seed; a zero-initialized
    model is returned unchanged when epochs=0. With ``collect_losses``
    the full-training-set loss at the end of each epoch is returned as
    well (batch-mean losses would mostly reflect the random batch
    composition through the pairwise term).
    """
    words = list(targets)
    missing = [w for w in words if e.vector(normalize_word(w)) is None]
    if missing:
        raise ValueError(f"words missing from embeddings: {missing}")
    emb = np.stack([e.vector(normalize_word(w)) for w in words]).astype(np.float64)
    target = np.stack([np.asarray(targets[w], dtype=np.float64) for w in words])

    model = DecoderModel(
        weights=np.zeros((emb.shape[1], target.shape[1])),
        bias=np.zeros(target.shape[1]),
    )
    rng = np.random.default_rng(p.seed)
    n = len(words)
    losses: list[float] = []
    for _epoch in range(p.epochs):
        perm = rng.permutation(n)
        for start in range(0, n, p.batch_size):
            batch = perm[start: start + p.batch_size]
            _loss, d_w, d_b = decoder_loss_grads(emb[batch], target[batch], model, p)
            model.weights -= p.lr * d_w
            model.bias -= p.lr * d_b
        if collect_losses:
            losses.append(combined_loss(model.predict(emb), target, model, p))
    if collect_losses:
        return model, losses
    return model


def _safe_cos(u: np.ndarray, v: np.ndarray) -> float:
    denom = np.linalg.norm(u) * np.linalg.norm(v)
    return float(u @ v / denom) if denom > 0 else 0.0


def two_vs_two_correct(
    pred_1: np.ndarray, pred_2: np.ndarray, obs_1: np.ndarray, obs_2: np.ndarray
) -> bool:
    """The leave-two-out decision: the matched assignment must win.

    Correct iff cos(p1,o1) + cos(p2,o2) > cos(p1,o2) + cos(p2,o1).
    """
    return _safe_cos(pred_1, obs_1) + _safe_cos(pred_2, obs_2) > _safe_cos(
        pred_1, obs_2
    ) + _safe_cos(pred_2, obs_1)


def _select_voxels(d: FmriDataset, training_words: list[str], n: int) -> np.ndarray:
    if d.min_presentations() >= 2:
        return stable_voxels(d, training_words, n)
    return top_variance_voxels(d, training_words, n)


def _fold_seed(seed: int, i: int, j: int) -> int:
    # derived from the pair identity so fold enumeration order is irrelevant
    return int(np.random.SeedSequence([seed, i, j]).generate_state(1)[0])


def _run_fold(
    args: tuple[EmbeddingMatrix, FmriDataset, DecoderParams, dict[str, np.ndarray], int, int]
) -> bool:
    e, d, p, reps, i, j = args
    held_out = {d.words[i], d.words[j]}
    training = [w for w in d.words if w not in held_out]
    n_vox = min(p.n_stable_voxels, d.voxel_count)
    voxels = _select_voxels(d, training, n_vox)
    targets = {w: reps[w][voxels] for w in training}
    fold_params = replace(p, seed=_fold_seed(p.seed, i, j))
    model = train_decoder(e, targets, fold_params)
    pred = [model.predict(e.vector(normalize_word(d.words[k]))) for k in (i, j)]
    obs = [reps[d.words[k]][voxels] for k in (i, j)]
    return two_vs_two_correct(pred[0], pred[1], obs[0], obs[1])


def two_vs_two(
    e: EmbeddingMatrix,
    d: FmriDataset,
    p: DecoderParams,
    fold_limit: int | None = None,
    workers: int = 1,
) -> float:
    """Leave-two-out accuracy over word pairs.

    Trains a fresh decoder per fold on the remaining words (with voxel
    selection recomputed from those words) and checks the summed-cosine
    match of the two held-out predictions. ``fold_limit`` draws a seeded
    uniform sample of pairs instead of enumerating all of them. Fold
    results do not depend on enumeration order or worker count.
    """
    if d.n_words < 3:
        raise ValueError("need at least 3 words for leave-two-out evaluation")
    missing = [w for w in d.words if e.vector(normalize_word(w)) is None]
    if missing:
        raise ValueError(f"words missing from embeddings: {missing}")
    pairs = list(itertools.combinations(range(d.n_words), 2))
    if fold_limit is not None and fold_limit < len(pairs):
        rng = np.random.default_rng(p.seed)
        chosen = rng.choice(len(pairs), size=fold_limit, replace=False)
        pairs = [pairs[k] for k in sorted(chosen)]
    reps = representative_images(d)
    tasks = [(e, d, p, reps, i, j) for i, j in pairs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_fold, tasks, chunksize=8))
    else:
        results = [_run_fold(t) for t in tasks]
    return float(np.mean(results))


def mse_eval(e: EmbeddingMatrix, d: FmriDataset, p: DecoderParams, n_folds: int = 5) -> float:
    """K-fold mean squared error between predicted and observed
    representatives over held-out words, pooled across folds."""
    if not 2 <= n_folds <= d.n_words:
        raise ValueError(f"n_folds must be in [2, {d.n_words}]")
    missing = [w for w in d.words if e.vector(normalize_word(w)) is None]
    if missing:
        raise ValueError(f"words missing from embeddings: {missing}")
    reps = representative_images(d)
    rng = np.random.default_rng(p.seed)
    perm = rng.permutation(d.n_words)
    sq_errors: list[np.ndarray] = []
    for fold in np.array_split(perm, n_folds):
        held_out = {d.words[k] for k in fold}
        training = [w for w in d.words if w not in held_out]
        n_vox = min(p.n_stable_voxels, d.voxel_count)
        voxels = _select_voxels(d, training, n_vox)
        targets = {w: reps[w][voxels] for w in training}
        model = train_decoder(e, targets, p)
        for k in fold:
            word = d.words[k]
            pred = model.predict(e.vector(normalize_word(word)))
            sq_errors.append((pred - reps[word][voxels]) ** 2)
    return float(np.mean(np.concatenate(sq_errors)))


# --- file formats -----------------------------------------------------------
#
# Canonical binary: magic, header lines (participant, voxel_count, grid,
# per-word presentation counts), then per (word, presentation) records of
# voxel_count little-endian 32-bit floats, word-major.
# TSV alternative for small tests: `word<TAB>presentation<TAB>v0<TAB>v1...`.


def save_fmri(d: FmriDataset, path: str | Path) -> None:
    path = Path(path)
    grid_dims = "x".join(str(v) for v in d.grid_dims) if d.grid_dims else "unknown"
    header = [
        f"participant\t{d.participant_id}",
        f"voxel_count\t{d.voxel_count}",
        f"grid\t{grid_dims}\t{d.grid_size}",
        f"words\t{d.n_words}",
    ]
    header += [f"{w}\t{p.shape[0]}" for w, p in zip(d.words, d.presentations)]
    header.append("end")
    with path.open("wb") as fh:
        fh.write(_BINARY_MAGIC)
        fh.write(("\n".join(header) + "\n").encode("utf-8"))
        for pres in d.presentations:
            fh.write(np.ascontiguousarray(pres, dtype="<f4").tobytes())


def save_fmri_tsv(d: FmriDataset, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"# participant: {d.participant_id}\n")
        fh.write(f"# grid: {d.grid_size}\n")
        for word, pres in zip(d.words, d.presentations):
            for r, row in enumerate(pres):
                vals = "\t".join(repr(float(v)) for v in row)
                fh.write(f"{word}\t{r}\t{vals}\n")


def load_fmri(path: str | Path) -> FmriDataset:
    """Read either the canonical binary format or the TSV alternative."""
    path = Path(path)
    with path.open("rb") as fh:
        magic = fh.read(len(_BINARY_MAGIC))
    if magic == _BINARY_MAGIC:
        return _load_fmri_binary(path)
    return _load_fmri_tsv(path)


def _load_fmri_binary(path: Path) -> FmriDataset:
    raw = path.read_bytes()[len(_BINARY_MAGIC):]
    marker = raw.find(b"\nend\n")
    if marker < 0:
        raise FmriFormatError(f"{path}: missing header terminator")
    lines = raw[:marker].decode("utf-8").split("\n")
    payload = raw[marker + len(b"\nend\n"):]

    fields = {}
    for key in ("participant", "voxel_count", "grid", "words"):
        if not lines:
            raise FmriFormatError(f"{path}: truncated header (missing {key})")
        parts = lines.pop(0).split("\t")
        if parts[0] != key:
            raise FmriFormatError(f"{path}: expected header field {key!r}, got {parts[0]!r}")
        fields[key] = parts[1:]
    participant = fields["participant"][0]
    voxel_count = int(fields["voxel_count"][0])
    grid_dims: tuple[int, int, int] | None = None
    if fields["grid"][0] != "unknown":
        grid_dims = tuple(int(v) for v in fields["grid"][0].split("x"))  # type: ignore[assignment]
    grid_size = fields["grid"][1] if len(fields["grid"]) > 1 else "unknown"
    n_words = int(fields["words"][0])
    if len(lines) != n_words:
        raise FmriFormatError(f"{path}: header declares {n_words} words, found {len(lines)}")

    words, rep_counts = [], []
    for line in lines:
        word, _, count = line.rpartition("\t")
        words.append(word)
        rep_counts.append(int(count))
    expected = sum(rep_counts) * voxel_count * 4
    if len(payload) != expected:
        raise FmriFormatError(f"{path}: payload is {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    presentations = []
    pos = 0
    for count in rep_counts:
        block = flat[pos: pos + count * voxel_count].reshape(count, voxel_count)
        presentations.append(block)
        pos += count * voxel_count
    return FmriDataset(
        participant_id=participant,
        words=words,
        presentations=presentations,
        voxel_count=voxel_count,
        grid_dims=grid_dims,
        grid_size=grid_size,
    )


def _load_fmri_tsv(path: Path) -> FmriDataset:
    participant = "unknown"
    grid_size = "unknown"
    rows: dict[str, list[tuple[int, np.ndarray]]] = {}
    voxel_count: int | None = None
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                key = key.strip().lower()
                if key == "participant":
                    participant = value.strip()
                elif key == "grid":
                    grid_size = value.strip()
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise FmriFormatError(f"{path}, line {lineno}: expected word, index, values")
            word = normalize_word(parts[0])
            try:
                rep = int(parts[1])
                values = np.array(parts[2:], dtype=np.float64)
            except ValueError:
                raise FmriFormatError(f"{path}, line {lineno}: bad numeric field")
            if voxel_count is None:
                voxel_count = len(values)
            elif len(values) != voxel_count:
                raise FmriFormatError(
                    f"{path}, line {lineno}: expected {voxel_count} voxels, got {len(values)}"
                )
            rows.setdefault(word, []).append((rep, values))
    if not rows or voxel_count is None:
        raise FmriFormatError(f"{path}: no data rows")
    words = list(rows)
    presentations = [
        np.stack([v for _r, v in sorted(rows[w], key=lambda t: t[0])]) for w in words
    ]
    return FmriDataset(
        participant_id=participant,
        words=words,
        presentations=presentations,
        voxel_count=voxel_count,
        grid_size=grid_size,
    )
