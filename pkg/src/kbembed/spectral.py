"""Spectral embedding pipelines over count adjacency matrices.

Two routes produce embeddings from a graph's adjacency counts:

* the factorization route applies a Katz proximity expansion
  (I - bA)^-1 - I before reweighting, and
* the streamlined route skips it.

Both then apply positive pointwise mutual information, row L2
normalization, and a PCA projection to the target dimension.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from kbembed.embeddings import EmbeddingMatrix
from kbembed.graph import CountMatrix, LexicalGraph, to_adjacency
from kbembed.vocab import Vocabulary

# dense (I - bA) solves above this size are not desk-feasible
EXACT_KATZ_LIMIT = 8000
# pipelines switch to a sparse code path above this adjacency size
DENSE_PIPELINE_LIMIT = 4096


@dataclass
class DenseMatrix:
    """A dense real matrix with optional row labels."""

    values: np.ndarray
    row_labels: Vocabulary | None = None

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-D array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("matrix contains non-finite values")
        if self.row_labels is not None and len(self.row_labels) != self.values.shape[0]:
            raise ValueError("row label count does not match matrix rows")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_cols(self) -> int:
        return self.values.shape[1]


@dataclass
class SpectralParams:
    """Configuration for the spectral pipelines.

    ``beta`` is the per-hop attenuation of the Katz expansion; exact mode
    requires beta * spectral_radius(A) < 1, checked at runtime. beta = 0 is
    accepted but degenerates to an all-zero proximity matrix, which the
    PMI step rejects.
    """

    beta: float = 0.5
    katz_mode: str = "exact"
    truncation_order: int = 50
    dim: int = 300
    center: bool = True

    def __post_init__(self) -> None:
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.katz_mode not in ("exact", "truncated"):
            raise ValueError(f"katz_mode must be exact or truncated, got {self.katz_mode!r}")
        if self.truncation_order < 1:
            raise ValueError("truncation_order must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")


def _as_csr(m: CountMatrix | DenseMatrix | np.ndarray | sp.spmatrix) -> tuple[sp.csr_matrix, Vocabulary | None]:
    if isinstance(m, CountMatrix):
        return m.counts.tocsr().astype(np.float64), m.row_labels
    if isinstance(m, DenseMatrix):
        return sp.csr_matrix(m.values), m.row_labels
    if sp.issparse(m):
        return m.tocsr().astype(np.float64), None
    return sp.csr_matrix(np.asarray(m, dtype=np.float64)), None


def _as_dense(m: CountMatrix | DenseMatrix | np.ndarray | sp.spmatrix) -> tuple[np.ndarray, Vocabulary | None]:
    if isinstance(m, CountMatrix):
        return m.counts.toarray().astype(np.float64), m.row_labels
    if isinstance(m, DenseMatrix):
        return m.values, m.row_labels
    if sp.issparse(m):
        return m.toarray().astype(np.float64), None
    return np.asarray(m, dtype=np.float64), None


def spectral_radius(a: sp.csr_matrix, iters: int = 100) -> float:
    """Estimate the spectral radius by power iteration.

    For nonnegative matrices the iteration converges to the Perron root.
    """
    n = a.shape[0]
    if n == 0 or a.nnz == 0:
        return 0.0
    x = np.full(n, 1.0 / np.sqrt(n))
    rho = 0.0
    for _ in range(iters):
        y = a @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        rho = norm
        x = y / norm
    return float(rho)


def katz_index(a: CountMatrix, params: SpectralParams) -> DenseMatrix:
    """Katz proximity of a square nonnegative adjacency matrix.

    Exact mode returns (I - bA)^-1 - I via a dense solve; truncated mode
    returns the partial power series sum_{k=1..K} b^k A^k.
    """
    counts, labels = _as_csr(a)
    n, m = counts.shape
    if n != m:
        raise ValueError(f"adjacency must be square, got {n}x{m}")
    beta = params.beta

    if params.katz_mode == "exact":
        if n > EXACT_KATZ_LIMIT:
            raise ValueError(
                f"matrix size {n} exceeds the exact-mode limit {EXACT_KATZ_LIMIT}; "
                "use truncated mode"
            )
        rho = spectral_radius(counts)
        if beta * rho >= 1.0:
            raise ValueError(
                f"beta * spectral_radius = {beta * rho:.6g} >= 1 "
                f"(estimated radius {rho:.6g}); reduce beta or use truncated mode"
            )
        system = np.eye(n) - beta * counts.toarray()
        inv = np.linalg.solve(system, np.eye(n))
        out = inv - np.eye(n)
        # round-off can leave tiny negatives in an analytically nonnegative result
        np.maximum(out, 0.0, out=out)
        return DenseMatrix(out, row_labels=labels)

    step = (beta * counts).tocsr()
    power = step.toarray()
    total = power.copy()
    for _ in range(params.truncation_order - 1):
        power = step @ power
        if not power.any():
            break
        total += power
    return DenseMatrix(total, row_labels=labels)


def _ppmi_csr(m: sp.csr_matrix) -> sp.csr_matrix:
    """Positive PMI over the stored entries of a sparse count matrix."""
    if m.nnz and m.data.min() < 0:
        raise ValueError("PMI input has negative entries")
    total = m.sum()
    if total <= 0:
        raise ValueError("PMI input is all zero")
    row_sums = np.asarray(m.sum(axis=1)).ravel()
    col_sums = np.asarray(m.sum(axis=0)).ravel()
    coo = m.tocoo()
    vals = np.log(coo.data * total / (row_sums[coo.row] * col_sums[coo.col]))
    np.maximum(vals, 0.0, out=vals)
    out = sp.coo_matrix((vals, (coo.row, coo.col)), shape=m.shape).tocsr()
    out.eliminate_zeros()
    return out


def ppmi_transform(m: CountMatrix | DenseMatrix | np.ndarray) -> DenseMatrix:
    """Positive pointwise mutual information of a nonnegative matrix.

    out(i, j) = max(0, log(m_ij * N / (r_i * c_j))) with N the grand total
    and r, c the marginals. Zero cells stay zero, so rows or columns with
    zero marginal contribute nothing.
    """
    values, labels = _as_dense(m)
    if values.size and values.min() < 0:
        raise ValueError("PMI input has negative entries")
    total = values.sum()
    if total <= 0:
        raise ValueError("PMI input is all zero")
    row_sums = values.sum(axis=1)
    col_sums = values.sum(axis=0)
    out = np.zeros_like(values)
    ii, jj = np.nonzero(values)
    pmi = np.log(values[ii, jj] * total / (row_sums[ii] * col_sums[jj]))
    out[ii, jj] = np.maximum(pmi, 0.0)
    return DenseMatrix(out, row_labels=labels)


def _l2_rows_csr(m: sp.csr_matrix) -> sp.csr_matrix:
    norms = np.sqrt(np.asarray(m.multiply(m).sum(axis=1)).ravel())
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return sp.diags(scale) @ m


def l2_normalize_rows(m: DenseMatrix | np.ndarray) -> DenseMatrix:
    """Scale each row to unit Euclidean norm; zero rows stay zero."""
    values, labels = _as_dense(m)
    norms = np.linalg.norm(values, axis=1, keepdims=True)
    scale = np.divide(1.0, norms, out=np.zeros_like(norms), where=norms > 0)
    return DenseMatrix(values * scale, row_labels=labels)


def pca_decompose(
    values: np.ndarray, dim: int, center: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """PCA projection of dense row data.

    Returns (projected, components, singular_values) where ``components``
    holds the top-``dim`` principal directions as rows, in non-increasing
    explained-variance order, and ``singular_values`` is the full spectrum
    of the (optionally centered) input. Each component's sign is fixed so
    its entry of largest magnitude is positive.
    """
    x = np.asarray(values, dtype=np.float64)
    if dim > min(x.shape):
        raise ValueError(f"dim {dim} exceeds min(matrix shape) {min(x.shape)}")
    if center:
        x = x - x.mean(axis=0)
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    full_s = s.copy()
    u, s, vt = u[:, :dim], s[:dim], vt[:dim]
    flips = np.where(vt[np.arange(dim), np.argmax(np.abs(vt), axis=1)] < 0, -1.0, 1.0)
    vt = vt * flips[:, None]
    projected = (u * flips) * s
    return projected, vt, full_s


def _pca_sparse(x: sp.csr_matrix, dim: int, center: bool) -> np.ndarray:
    """Truncated PCA for large sparse inputs, centering implicitly."""
    n, m = x.shape
    if dim >= min(n, m):
        dense = x.toarray()
        projected, _, _ = pca_decompose(dense, dim, center)
        return projected
    if center:
        mean = np.asarray(x.mean(axis=0)).ravel()

        def matvec(v):
            v = np.asarray(v).ravel()
            return x @ v - np.full(n, float(mean @ v))

        def rmatvec(u):
            u = np.asarray(u).ravel()
            return x.T @ u - mean * float(u.sum())

        target = spla.LinearOperator(
            shape=(n, m), matvec=matvec, rmatvec=rmatvec, dtype=np.float64
        )
    else:
        target = x
    # fixed start vector keeps the Lanczos iteration reproducible
    v0 = np.random.default_rng(0).standard_normal(min(n, m))
    u, s, vt = spla.svds(target, k=dim, v0=v0)
    order = np.argsort(s)[::-1]
    u, s, vt = u[:, order], s[order], vt[order]
    flips = np.where(vt[np.arange(dim), np.argmax(np.abs(vt), axis=1)] < 0, -1.0, 1.0)
    return (u * flips) * s


def pca_reduce(m: DenseMatrix, dim: int, center: bool = True) -> EmbeddingMatrix:
    """Project rows onto the top-``dim`` principal directions."""
    if m.row_labels is None:
        raise ValueError("pca_reduce needs row labels to build an embedding matrix")
    projected, _, _ = pca_decompose(m.values, dim, center)
    return EmbeddingMatrix(vocab=m.row_labels, vectors=projected)


def pipeline_pmi(
    g: LexicalGraph,
    params: SpectralParams,
    relation_filter: set[str] | None = None,
    dense_limit: int = DENSE_PIPELINE_LIMIT,
) -> EmbeddingMatrix:
    """Adjacency -> PPMI -> row L2 -> PCA, with no proximity expansion.

    Above ``dense_limit`` rows the PPMI and normalization steps stay
    sparse and the projection uses a truncated solver.
    """
    adjacency = to_adjacency(g, relation_filter)
    if adjacency.n_rows <= dense_limit:
        reweighted = ppmi_transform(adjacency)
        normalized = l2_normalize_rows(reweighted)
        return pca_reduce(normalized, params.dim, params.center)
    reweighted = _ppmi_csr(adjacency.counts)
    normalized = _l2_rows_csr(reweighted)
    projected = _pca_sparse(normalized.tocsr(), params.dim, params.center)
    return EmbeddingMatrix(vocab=g.vocab, vectors=projected)


def pipeline_katz(
    g: LexicalGraph,
    params: SpectralParams,
    relation_filter: set[str] | None = None,
) -> EmbeddingMatrix:
    """Adjacency -> Katz proximity -> PPMI -> row L2 -> PCA."""
    adjacency = to_adjacency(g, relation_filter)
    proximity = katz_index(adjacency, params)
    reweighted = ppmi_transform(proximity)
    normalized = l2_normalize_rows(reweighted)
    return pca_reduce(normalized, params.dim, params.center)
