"""Skip-gram with negative sampling, trained on walk pseudo-corpora.

A deliberately plain single-worker trainer: per (center, context) pair it
pushes the sigmoid scores of the true context toward 1 and of sampled
noise words toward 0. Noise words follow the unigram distribution raised
to the 0.75 power. The learning rate decays linearly over the run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from kbembed.embeddings import EmbeddingMatrix
from kbembed.graph import LexicalGraph
from kbembed.vocab import Vocabulary
from kbembed.walk import WalkCorpus, WalkParams, generate_walk_corpus

NOISE_POWER = 0.75


@dataclass
class SgnsParams:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    final_lr: float = 1e-4
    min_count: int = 5
    subsample_t: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not self.initial_lr > self.final_lr > 0:
            raise ValueError("need initial_lr > final_lr > 0")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if self.subsample_t < 0:
            raise ValueError("subsample_t must be >= 0")


def _log_sigmoid(x: np.ndarray | float) -> np.ndarray | float:
    return -np.logaddexp(0.0, -x)


def sgns_pair_loss(v_in: np.ndarray, u_out: np.ndarray, u_neg: np.ndarray) -> float:
    """Negative log likelihood of one positive pair plus its noise words.

    loss = -log s(v.u_out) - sum_i log s(-v.u_neg_i)
    """
    pos = _log_sigmoid(float(v_in @ u_out))
    neg = _log_sigmoid(-(u_neg @ v_in)).sum() if len(u_neg) else 0.0
    return float(-(pos + neg))


def sgns_pair_gradients(
    v_in: np.ndarray, u_out: np.ndarray, u_neg: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients of :func:`sgns_pair_loss` w.r.t. (v_in, u_out, u_neg)."""
    sig_pos = 1.0 / (1.0 + np.exp(-float(v_in @ u_out)))
    sig_neg = 1.0 / (1.0 + np.exp(-(u_neg @ v_in)))
    d_v = (sig_pos - 1.0) * u_out + sig_neg @ u_neg
    d_out = (sig_pos - 1.0) * v_in
    d_neg = np.outer(sig_neg, v_in)
    return d_v, d_out, d_neg


def _keep_probabilities(counts: np.ndarray, t: float) -> np.ndarray:
    """Word2vec-style frequency subsampling: keep probability per word."""
    if t <= 0:
        return np.ones_like(counts, dtype=np.float64)
    freq = counts / counts.sum()
    with np.errstate(divide="ignore"):
        keep = (np.sqrt(freq / t) + 1.0) * (t / freq)
    return np.minimum(keep, 1.0)


def train_skipgram(
    c: WalkCorpus, p: SgnsParams, collect_losses: bool = False
) -> EmbeddingMatrix | tuple[EmbeddingMatrix, list[float]]:
    """Train SGNS on a walk corpus; returns input-side vectors.

    Words occurring fewer than ``min_count`` times are dropped from the
    token stream. Deterministic for fixed corpus, params and seed. With
    ``collect_losses`` the per-epoch mean pair loss is returned as well.
    """
    if not c.walks:
        raise ValueError("corpus is empty")
    counts = np.zeros(len(c.vocab), dtype=np.int64)
    for walk in c.walks:
        np.add.at(counts, walk, 1)
    retained = np.flatnonzero(counts >= p.min_count)
    if len(retained) == 0:
        raise ValueError(f"no word reaches min_count={p.min_count}")

    remap = np.full(len(c.vocab), -1, dtype=np.int64)
    remap[retained] = np.arange(len(retained))
    sentences = []
    for walk in c.walks:
        kept = remap[walk]
        kept = kept[kept >= 0]
        if len(kept):
            sentences.append(kept)
    vocab_counts = counts[retained].astype(np.float64)
    keep_prob = _keep_probabilities(vocab_counts, p.subsample_t)
    noise_cum = np.cumsum(vocab_counts**NOISE_POWER)
    noise_total = noise_cum[-1]

    n_words = len(retained)
    rng = np.random.default_rng(p.seed)
    w_in = (rng.random((n_words, p.dim)) - 0.5) / p.dim
    w_out = np.zeros((n_words, p.dim))

    total_tokens = sum(len(s) for s in sentences)
    schedule = max(1, total_tokens * p.epochs)
    lr_span = p.initial_lr - p.final_lr
    processed = 0
    epoch_losses: list[float] = []

    for _epoch in range(p.epochs):
        loss_sum = 0.0
        n_pairs = 0
        for sentence in sentences:
            kept = sentence[rng.random(len(sentence)) < keep_prob[sentence]]
            length = len(kept)
            for i in range(length):
                lr = p.initial_lr - lr_span * (processed / schedule)
                processed += 1
                reduced = int(rng.integers(1, p.window + 1))
                center = kept[i]
                v = w_in[center]
                for j in range(max(0, i - reduced), min(length, i + reduced + 1)):
                    if j == i:
                        continue
                    target = kept[j]
                    negs = np.empty(p.negatives, dtype=np.int64)
                    for k in range(p.negatives):
                        while True:
                            cand = int(
                                np.searchsorted(noise_cum, rng.random() * noise_total, side="right")
                            )
                            if cand != target:
                                break
                        negs[k] = cand
                    rows = np.concatenate(([target], negs))
                    u = w_out[rows]
                    scores = u @ v
                    sig = 1.0 / (1.0 + np.exp(-scores))
                    if collect_losses:
                        loss_sum -= float(
                            _log_sigmoid(scores[0]) + _log_sigmoid(-scores[1:]).sum()
                        )
                        n_pairs += 1
                    labels = np.zeros(len(rows))
                    labels[0] = 1.0
                    coef = (labels - sig) * lr
                    d_v = coef @ u
                    np.add.at(w_out, rows, coef[:, None] * v)
                    w_in[center] += d_v
            # each sentence is one update stream; tokens removed by
            # subsampling still advance the lr schedule
            processed += len(sentence) - length
        if collect_losses:
            epoch_losses.append(loss_sum / max(1, n_pairs))

    vocab = Vocabulary(c.vocab.word(i) for i in retained)
    embeddings = EmbeddingMatrix(vocab=vocab, vectors=w_in)
    if collect_losses:
        return embeddings, epoch_losses
    return embeddings


def pipeline_walk(g: LexicalGraph, wp: WalkParams, sp: SgnsParams) -> EmbeddingMatrix:
    """Generate a walk corpus from the graph and train SGNS on it."""
    corpus = generate_walk_corpus(g, wp)
    return train_skipgram(corpus, sp)
