"""Edge-reconstruction embeddings via semantic matching energy.

Triples (lhs, rel, rhs) from either knowledge-base family are scored by
combining entity and relation vectors through learned linear maps:

    score = dot(Wl1 @ e_lhs + Wl2 @ e_rel + bl,
                Wr1 @ e_rhs + Wr2 @ e_rel + br)

Training minimizes a margin ranking loss against corrupted triples and
keeps the snapshot with the best validation mean rank.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from kbembed.embeddings import EmbeddingMatrix
from kbembed.graph import LexicalGraph, SWOW_SLOTS
from kbembed.vocab import Vocabulary, normalize_word


@dataclass
class TripleSet:
    """Deduplicated (lhs, rel, rhs) id triples over shared vocabularies."""

    triples: np.ndarray
    entity_vocab: Vocabulary
    relation_vocab: list[str]

    def __post_init__(self) -> None:
        self.triples = np.asarray(self.triples, dtype=np.int64).reshape(-1, 3)

    def __len__(self) -> int:
        return len(self.triples)


@dataclass
class SmeTrainParams:
    dim: int = 300
    epochs: int = 500
    eval_every: int = 10
    lr: float = 0.01
    n_batches: int = 200
    margin: float = 1.0
    valid_frac: float = 0.05
    test_frac: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.epochs < 0 or self.eval_every < 1 or self.n_batches < 1:
            raise ValueError("epochs >= 0, eval_every >= 1, n_batches >= 1 required")
        for frac in (self.valid_frac, self.test_frac):
            if not 0.0 < frac < 0.5:
                raise ValueError(f"split fractions must be in (0, 0.5), got {frac}")


@dataclass
class SmeModel:
    """Entity/relation embeddings plus the left and right linear maps."""

    entities: np.ndarray        # (n_entities, d)
    relations: np.ndarray       # (n_relations, d)
    w_left_ent: np.ndarray      # (d, d)
    w_left_rel: np.ndarray      # (d, d)
    b_left: np.ndarray          # (d,)
    w_right_ent: np.ndarray
    w_right_rel: np.ndarray
    b_right: np.ndarray

    @property
    def dim(self) -> int:
        return self.entities.shape[1]

    def copy(self) -> "SmeModel":
        return copy.deepcopy(self)


def wordnet_triples(
    synset_edges: Iterable[tuple[str, str, str]],
    synset_members: Mapping[str, Iterable[str]],
    vocab: Vocabulary,
) -> TripleSet:
    """Expand synset-level relations into word-level triples.

    For every related synset pair, each in-vocabulary member of the left
    synset is linked to each in-vocabulary member of the right synset.
    Duplicates collapse.
    """
    members: dict[str, list[int]] = {}

    def member_ids(synset: str) -> list[int]:
        got = members.get(synset)
        if got is None:
            if synset not in synset_members:
                raise KeyError(f"synset {synset!r} has no membership entry")
            ids = []
            for word in synset_members[synset]:
                idx = vocab.get(normalize_word(word))
                if idx is not None:
                    ids.append(idx)
            members[synset] = got = ids
        return got

    relations: list[str] = []
    rel_ids: dict[str, int] = {}
    seen: set[tuple[int, int, int]] = set()
    for s_lhs, rel, s_rhs in synset_edges:
        rid = rel_ids.get(rel)
        if rid is None:
            rid = rel_ids[rel] = len(relations)
            relations.append(rel)
        for lhs in member_ids(s_lhs):
            for rhs in member_ids(s_rhs):
                seen.add((lhs, rid, rhs))
    triples = np.array(sorted(seen), dtype=np.int64).reshape(-1, 3)
    return TripleSet(triples=triples, entity_vocab=vocab, relation_vocab=relations)


def swow_triples(g: LexicalGraph) -> TripleSet:
    """One triple per distinct (cue, slot, response) edge, weights dropped."""
    unexpected = g.relation_labels - set(SWOW_SLOTS)
    if unexpected:
        raise ValueError(f"unexpected relation labels for SWOW triples: {sorted(unexpected)}")
    if not g.edges:
        raise ValueError("graph has no edges")
    relations = sorted(g.relation_labels)
    rel_ids = {r: i for i, r in enumerate(relations)}
    triples = sorted((s, rel_ids[rel], d) for (s, rel, d) in g.edges)
    return TripleSet(
        triples=np.array(triples, dtype=np.int64),
        entity_vocab=g.vocab,
        relation_vocab=relations,
    )


def split_triples(
    t: TripleSet, valid_frac: float, test_frac: float, seed: int
) -> tuple[TripleSet, TripleSet, TripleSet]:
    """Disjoint uniform random (train, valid, test) partition."""
    for frac in (valid_frac, test_frac):
        if not 0.0 < frac < 0.5:
            raise ValueError(f"split fractions must be in (0, 0.5), got {frac}")
    n = len(t)
    n_valid = round(n * valid_frac)
    n_test = round(n * test_frac)
    if n - n_valid - n_test < 1:
        raise ValueError(f"split leaves no training triples (n={n})")
    perm = np.random.default_rng(seed).permutation(n)

    def subset(idx: np.ndarray) -> TripleSet:
        return TripleSet(
            triples=t.triples[np.sort(idx)],
            entity_vocab=t.entity_vocab,
            relation_vocab=t.relation_vocab,
        )

    return (
        subset(perm[n_valid + n_test:]),
        subset(perm[:n_valid]),
        subset(perm[n_valid: n_valid + n_test]),
    )


def init_sme_model(n_entities: int, n_relations: int, dim: int, seed: int) -> SmeModel:
    """Scaled uniform init; entity rows start at unit norm."""
    rng = np.random.default_rng(seed)
    bound = 6.0 / np.sqrt(dim)

    def uniform(*shape):
        return rng.uniform(-bound, bound, size=shape)

    entities = _renormalize_rows(uniform(n_entities, dim))
    return SmeModel(
        entities=entities,
        relations=uniform(n_relations, dim),
        w_left_ent=uniform(dim, dim),
        w_left_rel=uniform(dim, dim),
        b_left=np.zeros(dim),
        w_right_ent=uniform(dim, dim),
        w_right_rel=uniform(dim, dim),
        b_right=np.zeros(dim),
    )


def _renormalize_rows(m: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return m / np.where(norms > 0, norms, 1.0)


def _left_vectors(m: SmeModel, lhs: np.ndarray, rel: np.ndarray) -> np.ndarray:
    return m.entities[lhs] @ m.w_left_ent.T + m.relations[rel] @ m.w_left_rel.T + m.b_left


def _right_vectors(m: SmeModel, rhs: np.ndarray, rel: np.ndarray) -> np.ndarray:
    return m.entities[rhs] @ m.w_right_ent.T + m.relations[rel] @ m.w_right_rel.T + m.b_right


def sme_score(m: SmeModel, triple: tuple[int, int, int]) -> float:
    """Plausibility score of one (lhs, rel, rhs) id triple; higher is better."""
    lhs, rel, rhs = (np.array([x]) for x in triple)
    return float(np.sum(_left_vectors(m, lhs, rel) * _right_vectors(m, rhs, rel)))


def _scores(m: SmeModel, triples: np.ndarray) -> np.ndarray:
    lhs, rel, rhs = triples[:, 0], triples[:, 1], triples[:, 2]
    return np.sum(_left_vectors(m, lhs, rel) * _right_vectors(m, rhs, rel), axis=1)


def margin_loss_and_grads(
    m: SmeModel, pos: np.ndarray, neg: np.ndarray, margin: float
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean hinge loss max(0, margin - s_pos + s_neg) and its gradients.

    ``pos`` and ``neg`` are aligned (n, 3) id arrays. Gradient keys match
    the SmeModel field names.
    """
    n = len(pos)
    grads = {
        "entities": np.zeros_like(m.entities),
        "relations": np.zeros_like(m.relations),
        "w_left_ent": np.zeros_like(m.w_left_ent),
        "w_left_rel": np.zeros_like(m.w_left_rel),
        "b_left": np.zeros_like(m.b_left),
        "w_right_ent": np.zeros_like(m.w_right_ent),
        "w_right_rel": np.zeros_like(m.w_right_rel),
        "b_right": np.zeros_like(m.b_right),
    }
    s_pos = _scores(m, pos)
    s_neg = _scores(m, neg)
    active = margin - s_pos + s_neg > 0
    loss = float(np.mean(np.maximum(0.0, margin - s_pos + s_neg)))
    if not active.any():
        return loss, grads

    # positives enter the hinge with coefficient -1/n, negatives with +1/n
    for triples, sign in ((pos[active], -1.0), (neg[active], 1.0)):
        lhs, rel, rhs = triples[:, 0], triples[:, 1], triples[:, 2]
        left = _left_vectors(m, lhs, rel)
        right = _right_vectors(m, rhs, rel)
        coef = sign / n
        e_l, e_r, r_v = m.entities[lhs], m.entities[rhs], m.relations[rel]
        grads["w_left_ent"] += coef * right.T @ e_l
        grads["w_left_rel"] += coef * right.T @ r_v
        grads["b_left"] += coef * right.sum(axis=0)
        grads["w_right_ent"] += coef * left.T @ e_r
        grads["w_right_rel"] += coef * left.T @ r_v
        grads["b_right"] += coef * left.sum(axis=0)
        np.add.at(grads["entities"], lhs, coef * right @ m.w_left_ent)
        np.add.at(grads["entities"], rhs, coef * left @ m.w_right_ent)
        np.add.at(grads["relations"], rel, coef * (right @ m.w_left_rel + left @ m.w_right_rel))
    return loss, grads


def _rank_of_true(scores: np.ndarray, true_idx: int) -> int:
    return 1 + int(np.sum(scores > scores[true_idx]))


def validation_mean_rank(m: SmeModel, triples: np.ndarray) -> float:
    """Mean raw rank of the true rhs and lhs among all entities."""
    n_entities = len(m.entities)
    all_ids = np.arange(n_entities)
    ranks = []
    for lhs, rel, rhs in triples:
        rel_arr = np.full(n_entities, rel)
        left_fixed = _left_vectors(m, np.array([lhs]), np.array([rel]))[0]
        right_all = _right_vectors(m, all_ids, rel_arr)
        ranks.append(_rank_of_true(right_all @ left_fixed, rhs))
        right_fixed = _right_vectors(m, np.array([rhs]), np.array([rel]))[0]
        left_all = _left_vectors(m, all_ids, rel_arr)
        ranks.append(_rank_of_true(left_all @ right_fixed, lhs))
    return float(np.mean(ranks))


def train_sme(
    train: TripleSet,
    valid: TripleSet,
    p: SmeTrainParams,
    eval_log: list[tuple[int, float]] | None = None,
) -> tuple[SmeModel, EmbeddingMatrix]:
    """Margin-ranking SGD over corrupted triples.

    One negative per positive corrupts lhs or rhs (coin flip) with a
    uniform random entity. Entity rows are renormalized to unit norm
    after each batch update. Every ``eval_every`` epochs (and after the
    final epoch) the validation mean rank is computed and the best
    snapshot is kept; that snapshot's entity table is returned as the
    embedding matrix.
    """
    if len(train) == 0:
        raise ValueError("training set is empty")
    n_entities = len(train.entity_vocab)
    rng = np.random.default_rng(p.seed)
    model = init_sme_model(n_entities, max(1, len(train.relation_vocab)), p.dim, p.seed)

    best = model.copy()
    best_rank = np.inf
    if len(valid) and p.epochs:
        best_rank = validation_mean_rank(model, valid.triples)
        if eval_log is not None:
            eval_log.append((0, best_rank))

    for epoch in range(1, p.epochs + 1):
        perm = rng.permutation(len(train))
        for batch_idx in np.array_split(perm, min(p.n_batches, len(train))):
            pos = train.triples[batch_idx]
            neg = pos.copy()
            corrupt_lhs = rng.random(len(pos)) < 0.5
            random_entities = rng.integers(n_entities, size=len(pos))
            neg[corrupt_lhs, 0] = random_entities[corrupt_lhs]
            neg[~corrupt_lhs, 2] = random_entities[~corrupt_lhs]
            loss, grads = margin_loss_and_grads(model, pos, neg, p.margin)
            if not np.isfinite(loss):
                raise RuntimeError(f"non-finite training loss at epoch {epoch}: {loss}")
            for name, grad in grads.items():
                setattr(model, name, getattr(model, name) - p.lr * grad)
            model.entities = _renormalize_rows(model.entities)
        if len(valid) and (epoch % p.eval_every == 0 or epoch == p.epochs):
            rank = validation_mean_rank(model, valid.triples)
            if eval_log is not None:
                eval_log.append((epoch, rank))
            if rank < best_rank:
                best_rank = rank
                best = model.copy()
    if not len(valid) or p.epochs == 0:
        best = model

    embeddings = EmbeddingMatrix(
        vocab=train.entity_vocab, vectors=best.entities.copy()
    )
    return best, embeddings
