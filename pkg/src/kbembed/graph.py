"""Lexical graphs built from cue/response strength tables and typed edge lists.

Two ingest routes cover the two knowledge-base families: feature-based
tables carry accumulated response counts per (cue, response, slot), while
inference-based edge lists carry binary typed links. Both produce the same
graph structure, which can be subset by out-degree and rendered as a sparse
count adjacency matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from kbembed.vocab import Vocabulary, normalize_word

SWOW_SLOTS = ("R1", "R2", "R3")
COMBINED_RELATION = "R123"


class GraphFormatError(ValueError):
    """Malformed graph or strength-table input."""


@dataclass
class LexicalGraph:
    """Vocabulary plus typed, weighted, directed edges.

    ``edges`` maps (src id, relation label, dst id) to a strictly positive
    weight; an absent key means weight zero. Graphs are immutable after
    construction and safe to share read-only across workers.
    """

    vocab: Vocabulary
    edges: dict[tuple[int, str, int], float]
    relation_labels: set[str] = field(default_factory=set)

    @property
    def n_words(self) -> int:
        return len(self.vocab)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def out_degrees(self) -> np.ndarray:
        """Count of distinct outgoing edges per word, over all relations."""
        deg = np.zeros(len(self.vocab), dtype=np.int64)
        for (src, _rel, _dst) in self.edges:
            deg[src] += 1
        return deg

    def total_weight(self) -> float:
        return float(sum(self.edges.values()))

    def edge_list(self) -> list[tuple[str, str, str, float]]:
        """Edges as (src word, relation, dst word, weight), sorted."""
        rows = [
            (self.vocab.word(s), rel, self.vocab.word(d), w)
            for (s, rel, d), w in self.edges.items()
        ]
        rows.sort()
        return rows


@dataclass
class CountMatrix:
    """Sparse nonnegative count matrix with labeled rows and columns.

    All stored entries are strictly positive; the total equals the number
    of accumulated association tokens ingested.
    """

    counts: sp.csr_matrix
    row_labels: Vocabulary
    col_labels: Vocabulary

    def __post_init__(self) -> None:
        self.counts = sp.csr_matrix(self.counts)
        self.counts.eliminate_zeros()
        if self.counts.shape != (len(self.row_labels), len(self.col_labels)):
            raise ValueError(
                f"matrix shape {self.counts.shape} does not match labels "
                f"({len(self.row_labels)}, {len(self.col_labels)})"
            )
        if self.counts.nnz and self.counts.data.min() < 0:
            raise ValueError("count matrix has negative entries")

    @property
    def n_rows(self) -> int:
        return self.counts.shape[0]

    @property
    def n_cols(self) -> int:
        return self.counts.shape[1]

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    def toarray(self) -> np.ndarray:
        return self.counts.toarray()


def _validate_swow_record(record, position: str) -> tuple[str, str, str, int]:
    try:
        cue, response, slot, count = record
    except (TypeError, ValueError):
        raise GraphFormatError(f"{position}: expected (cue, response, slot, count)")
    cue = normalize_word(str(cue))
    response = normalize_word(str(response))
    if not cue or not response:
        raise GraphFormatError(f"{position}: empty cue or response")
    if slot not in SWOW_SLOTS:
        raise GraphFormatError(f"{position}: slot {slot!r} not one of {SWOW_SLOTS}")
    try:
        count = int(count)
    except (TypeError, ValueError):
        raise GraphFormatError(f"{position}: count {count!r} is not an integer")
    if count <= 0:
        raise GraphFormatError(f"{position}: count must be positive, got {count}")
    return cue, response, slot, count


def ingest_swow(
    records: Iterable[tuple[str, str, str, int]],
    mode: str = "combined",
    drop_response_only: bool = False,
) -> LexicalGraph:
    """Build a graph from (cue, response, slot, count) records.

    ``mode="combined"`` sums the three response slots into a single
    relation; ``mode="per-slot"`` keeps R1/R2/R3 as distinct relation
    labels. Re-ingesting the same (cue, relation, response) accumulates
    weight. Words are lowercased and trimmed; multi-word cues are kept
    verbatim. ``drop_response_only`` restricts the vocabulary to words
    that occur as cues.
    """
    if mode not in ("combined", "per-slot"):
        raise ValueError(f"unknown ingest mode {mode!r}")

    vocab = Vocabulary()
    edges: dict[tuple[int, str, int], float] = {}
    cues: set[int] = set()
    n_records = 0
    for i, record in enumerate(records):
        cue, response, slot, count = _validate_swow_record(record, f"record {i + 1}")
        n_records += 1
        src = vocab.add(cue)
        dst = vocab.add(response)
        cues.add(src)
        rel = COMBINED_RELATION if mode == "combined" else slot
        key = (src, rel, dst)
        edges[key] = edges.get(key, 0.0) + count
    if n_records == 0:
        raise GraphFormatError("empty input: no records to ingest")

    labels = {COMBINED_RELATION} if mode == "combined" else set(SWOW_SLOTS)
    labels &= {rel for (_s, rel, _d) in edges}
    graph = LexicalGraph(vocab=vocab, edges=edges, relation_labels=labels)
    if drop_response_only:
        keep = [vocab.word(i) for i in sorted(cues)]
        graph = _restrict(graph, keep)
    return graph


def ingest_edge_list(records: Iterable[tuple[str, str, str]]) -> LexicalGraph:
    """Build a binary-edge graph from (lhs, relation, rhs) triples.

    Every distinct triple gets weight 1; duplicates collapse. Relation
    labels are preserved verbatim; node words are normalized.
    """
    vocab = Vocabulary()
    edges: dict[tuple[int, str, int], float] = {}
    labels: set[str] = set()
    n_records = 0
    for i, record in enumerate(records):
        try:
            lhs, rel, rhs = record
        except (TypeError, ValueError):
            raise GraphFormatError(f"record {i + 1}: expected (lhs, rel, rhs)")
        lhs = normalize_word(str(lhs))
        rhs = normalize_word(str(rhs))
        rel = str(rel).strip()
        if not lhs or not rhs or not rel:
            raise GraphFormatError(f"record {i + 1}: empty field")
        n_records += 1
        edges[(vocab.add(lhs), rel, vocab.add(rhs))] = 1.0
        labels.add(rel)
    if n_records == 0:
        raise GraphFormatError("empty input: no records to ingest")
    return LexicalGraph(vocab=vocab, edges=edges, relation_labels=labels)


def _restrict(g: LexicalGraph, keep_words: list[str]) -> LexicalGraph:
    """Subset ``g`` to ``keep_words``, dropping edges that leave the set.

    The new vocabulary keeps the original id order of the retained words,
    which makes repeated restriction a no-op.
    """
    keep_ids = {g.vocab.id_of(w) for w in keep_words}
    ordered = [w for w in g.vocab if g.vocab.id_of(w) in keep_ids]
    vocab = Vocabulary(ordered)
    remap = {g.vocab.id_of(w): vocab.id_of(w) for w in ordered}
    edges = {
        (remap[s], rel, remap[d]): w
        for (s, rel, d), w in g.edges.items()
        if s in remap and d in remap
    }
    labels = {rel for (_s, rel, _d) in edges}
    return LexicalGraph(vocab=vocab, edges=edges, relation_labels=labels)


def select_subgraph(g: LexicalGraph, k: int) -> LexicalGraph:
    """Keep the k words with the most distinct outgoing edges.

    Ties at the cutoff break lexicographically ascending. Edges with
    either endpoint outside the retained set are dropped; the retained
    vocabulary keeps its original relative order.
    """
    if k <= 0:
        raise ValueError(f"k must be positive, got {k}")
    if k > len(g.vocab):
        raise ValueError(f"k={k} exceeds vocabulary size {len(g.vocab)}")
    deg = g.out_degrees()
    ranked = sorted(g.vocab, key=lambda w: (-deg[g.vocab.id_of(w)], w))
    return _restrict(g, ranked[:k])


def to_adjacency(g: LexicalGraph, relation_filter: set[str] | None = None) -> CountMatrix:
    """Render the graph as a square count matrix over its vocabulary.

    Entry (i, j) sums the weights of edges i -> j whose relation is in
    ``relation_filter`` (all relations when absent).
    """
    if relation_filter is not None:
        unknown = set(relation_filter) - g.relation_labels
        if unknown:
            raise ValueError(f"unknown relation labels in filter: {sorted(unknown)}")
    n = len(g.vocab)
    rows, cols, vals = [], [], []
    for (src, rel, dst), w in g.edges.items():
        if relation_filter is None or rel in relation_filter:
            rows.append(src)
            cols.append(dst)
            vals.append(w)
    counts = sp.coo_matrix((vals, (rows, cols)), shape=(n, n), dtype=np.float64)
    return CountMatrix(counts.tocsr(), row_labels=g.vocab, col_labels=g.vocab)


# --- file formats -----------------------------------------------------------
#
# SWOW strength file: UTF-8 TSV, header `cue<TAB>response<TAB>slot<TAB>count`.
# Edge list file:     UTF-8 TSV `lhs<TAB>rel<TAB>rhs`, `#` starts a comment.
# Graph export:       edge-list TSV with a fourth `weight` column.


def load_swow_tsv(path: str | Path) -> Iterator[tuple[str, str, str, int]]:
    """Yield validated records from a SWOW strength TSV."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise GraphFormatError(f"{path}: empty file")
        cols = header.rstrip("\n").split("\t")
        if [c.strip().lower() for c in cols] != ["cue", "response", "slot", "count"]:
            raise GraphFormatError(
                f"{path}, line 1: expected header cue/response/slot/count, got {cols}"
            )
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise GraphFormatError(
                    f"{path}, line {lineno}: expected 4 tab-separated fields, got {len(parts)}"
                )
            yield _validate_swow_record(tuple(parts), f"{path}, line {lineno}")


def save_swow_tsv(records: Iterable[tuple[str, str, str, int]], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write("cue\tresponse\tslot\tcount\n")
        for cue, response, slot, count in records:
            fh.write(f"{cue}\t{response}\t{slot}\t{count}\n")


def load_edge_list_tsv(path: str | Path) -> Iterator[tuple[str, str, str]]:
    """Yield (lhs, rel, rhs) triples from an edge-list TSV."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise GraphFormatError(
                    f"{path}, line {lineno}: expected 3 tab-separated fields, got {len(parts)}"
                )
            yield (parts[0], parts[1], parts[2])


def _format_weight(w: float) -> str:
    return str(int(w)) if float(w).is_integer() else repr(float(w))


def save_graph_tsv(g: LexicalGraph, path: str | Path) -> None:
    """Export as edge-list TSV with a weight column."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for src, rel, dst, w in g.edge_list():
            fh.write(f"{src}\t{rel}\t{dst}\t{_format_weight(w)}\n")


def load_graph_tsv(path: str | Path) -> LexicalGraph:
    """Read a graph from edge-list TSV, with or without a weight column.

    Three columns imply weight 1. Duplicate (src, rel, dst) rows
    accumulate weight.
    """
    path = Path(path)
    vocab = Vocabulary()
    edges: dict[tuple[int, str, int], float] = {}
    labels: set[str] = set()
    n_rows = 0
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 3:
                lhs, rel, rhs = parts
                w = 1.0
            elif len(parts) == 4:
                lhs, rel, rhs = parts[:3]
                try:
                    w = float(parts[3])
                except ValueError:
                    raise GraphFormatError(f"{path}, line {lineno}: bad weight {parts[3]!r}")
            else:
                raise GraphFormatError(
                    f"{path}, line {lineno}: expected 3 or 4 fields, got {len(parts)}"
                )
            lhs = normalize_word(lhs)
            rhs = normalize_word(rhs)
            rel = rel.strip()
            if not lhs or not rhs or not rel:
                raise GraphFormatError(f"{path}, line {lineno}: empty field")
            if w <= 0:
                raise GraphFormatError(f"{path}, line {lineno}: weight must be positive")
            key = (vocab.add(lhs), rel, vocab.add(rhs))
            edges[key] = edges.get(key, 0.0) + w
            labels.add(rel)
            n_rows += 1
    if n_rows == 0:
        raise GraphFormatError(f"{path}: empty graph file")
    return LexicalGraph(vocab=vocab, edges=edges, relation_labels=labels)
