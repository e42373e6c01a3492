import numpy as np
import pytest
import scipy.sparse as sp

from kbembed.embeddings import EmbeddingMatrix
from kbembed.graph import CountMatrix, ingest_swow, to_adjacency
from kbembed.spectral import (
    DenseMatrix,
    SpectralParams,
    katz_index,
    l2_normalize_rows,
    pca_decompose,
    pca_reduce,
    pipeline_katz,
    pipeline_pmi,
    ppmi_transform,
    spectral_radius,
)
from kbembed.vocab import Vocabulary

from conftest import block_cosine_gap, make_sbm_graph


def count_matrix(arr):
    n, m = np.asarray(arr).shape
    rows = Vocabulary([f"r{i}" for i in range(n)])
    cols = Vocabulary([f"c{j}" for j in range(m)]) if n != m else rows
    return CountMatrix(sp.csr_matrix(np.asarray(arr, dtype=float)), rows, cols)


class TestKatzIndex:
    def test_two_node_closed_form(self):
        # (I - 0.5 A)^-1 - I for A = [[0,1],[1,0]] is [[1/3,2/3],[2/3,1/3]]
        a = count_matrix([[0.0, 1.0], [1.0, 0.0]])
        out = katz_index(a, SpectralParams(beta=0.5, katz_mode="exact", dim=2))
        assert np.allclose(out.values, [[1 / 3, 2 / 3], [2 / 3, 1 / 3]], atol=1e-12)

    def test_truncated_k1_is_beta_a(self):
        arr = np.array([[0.0, 2.0], [1.0, 0.0]])
        out = katz_index(
            count_matrix(arr),
            SpectralParams(beta=0.25, katz_mode="truncated", truncation_order=1, dim=2),
        )
        assert np.array_equal(out.values, 0.25 * arr)

    def test_truncated_converges_to_exact(self):
        rng = np.random.default_rng(7)
        arr = rng.random((10, 10)) * (rng.random((10, 10)) < 0.3)
        a = count_matrix(arr)
        exact = katz_index(a, SpectralParams(beta=0.05, katz_mode="exact", dim=2))
        trunc = katz_index(
            a, SpectralParams(beta=0.05, katz_mode="truncated", truncation_order=50, dim=2)
        )
        assert np.max(np.abs(exact.values - trunc.values)) < 1e-10

    def test_truncation_error_shrinks_monotonically(self):
        rng = np.random.default_rng(3)
        arr = rng.random((8, 8)) * (rng.random((8, 8)) < 0.4)
        a = count_matrix(arr)
        exact = katz_index(a, SpectralParams(beta=0.08, katz_mode="exact", dim=2)).values
        errs = []
        for k in (1, 2, 4, 8, 16):
            trunc = katz_index(
                a, SpectralParams(beta=0.08, katz_mode="truncated", truncation_order=k, dim=2)
            ).values
            errs.append(np.max(np.abs(exact - trunc)))
        assert all(e1 >= e2 for e1, e2 in zip(errs, errs[1:]))

    def test_unstable_beta_errors_with_radius(self):
        a = count_matrix([[0.0, 1.0], [1.0, 0.0]])  # spectral radius 1
        with pytest.raises(ValueError, match="radius"):
            katz_index(a, SpectralParams(beta=1.5, katz_mode="exact", dim=2))

    def test_non_square_errors(self):
        a = count_matrix(np.ones((2, 3)))
        with pytest.raises(ValueError, match="square"):
            katz_index(a, SpectralParams(dim=1))

    def test_radius_estimate(self):
        arr = np.diag([0.3, 2.5, 1.0])
        assert spectral_radius(sp.csr_matrix(arr)) == pytest.approx(2.5, rel=1e-6)


class TestPpmi:
    def test_uniform_matrix_gives_zero(self):
        out = ppmi_transform(np.full((4, 4), 3.0))
        assert np.array_equal(out.values, np.zeros((4, 4)))

    def test_hand_case(self):
        out = ppmi_transform(np.array([[2.0, 0.0], [0.0, 2.0]]))
        expected = np.array([[np.log(2), 0.0], [0.0, np.log(2)]])
        assert np.allclose(out.values, expected, atol=1e-15)

    def test_count_scale_invariance(self):
        rng = np.random.default_rng(11)
        m = rng.integers(0, 5, size=(6, 6)).astype(float)
        m[0, 1] = 3.0
        assert np.allclose(ppmi_transform(m).values, ppmi_transform(7.0 * m).values)

    def test_nonnegative_and_zero_preserving(self):
        rng = np.random.default_rng(5)
        m = rng.random((8, 8)) * (rng.random((8, 8)) < 0.4)
        m[2, :] = 0.0  # a zero row survives as zeros
        out = ppmi_transform(m).values
        assert out.min() >= 0.0
        assert np.array_equal(out == 0.0, (out == 0.0) | (m == 0.0))
        assert np.all(out[m == 0.0] == 0.0)

    def test_errors(self):
        with pytest.raises(ValueError, match="negative"):
            ppmi_transform(np.array([[1.0, -1.0], [0.0, 2.0]]))
        with pytest.raises(ValueError, match="zero"):
            ppmi_transform(np.zeros((3, 3)))

    def test_accepts_count_matrix(self):
        cm = count_matrix([[2.0, 0.0], [0.0, 2.0]])
        assert np.allclose(ppmi_transform(cm).values.diagonal(), np.log(2))


class TestL2Normalize:
    def test_three_four_five(self):
        out = l2_normalize_rows(np.array([[3.0, 4.0]]))
        assert np.allclose(out.values, [[0.6, 0.8]])

    def test_zero_row_stays_zero(self):
        out = l2_normalize_rows(np.array([[0.0, 0.0], [1.0, 1.0]]))
        assert np.array_equal(out.values[0], [0.0, 0.0])
        assert np.linalg.norm(out.values[1]) == pytest.approx(1.0, abs=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        m = rng.normal(size=(5, 4))
        once = l2_normalize_rows(m)
        twice = l2_normalize_rows(once)
        assert np.allclose(once.values, twice.values, atol=1e-12)


class TestPca:
    def test_rank_one_data_explains_everything(self):
        t = np.linspace(-1, 1, 30)
        data = np.stack([t, 2 * t], axis=1)
        _proj, _comp, s = pca_decompose(data, 1, center=True)
        assert s[0] ** 2 / np.sum(s**2) == pytest.approx(1.0, abs=1e-10)

    def test_full_dim_uncentered_preserves_distances(self):
        rng = np.random.default_rng(1)
        m = rng.normal(size=(12, 5))
        proj, _c, _s = pca_decompose(m, 5, center=False)

        def pdist(x):
            diff = x[:, None, :] - x[None, :, :]
            return np.sqrt((diff**2).sum(-1))

        assert np.allclose(pdist(m), pdist(proj), atol=1e-8)

    def test_components_against_eigendecomposition(self):
        rng = np.random.default_rng(2)
        m = rng.normal(size=(50, 10))
        proj, comps, s = pca_decompose(m, 10, center=True)
        # independent route: eigenvalues of the centered Gram matrix
        centered = m - m.mean(axis=0)
        eigvals = np.sort(np.linalg.eigvalsh(centered.T @ centered))[::-1]
        assert np.allclose(eigvals, s**2, atol=1e-8)
        assert np.allclose(comps @ comps.T, np.eye(10), atol=1e-8)
        variances = proj.var(axis=0)
        assert np.all(np.diff(variances) <= 1e-10)

    def test_sign_convention_is_deterministic(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(20, 6))
        _p, comps, _s = pca_decompose(m, 6, center=True)
        peaks = comps[np.arange(6), np.argmax(np.abs(comps), axis=1)]
        assert np.all(peaks > 0)

    def test_dim_too_large_errors(self):
        with pytest.raises(ValueError, match="dim"):
            pca_decompose(np.ones((3, 2)), 3, center=False)

    def test_pca_reduce_returns_embeddings(self):
        rng = np.random.default_rng(4)
        dm = DenseMatrix(rng.normal(size=(6, 4)), row_labels=Vocabulary("abcdef"))
        emb = pca_reduce(dm, 2)
        assert isinstance(emb, EmbeddingMatrix)
        assert emb.vectors.shape == (6, 2)


class TestPipelines:
    def swow_graph(self, records):
        return ingest_swow(records)

    def test_pipeline_katz_matches_composed_oracle(self):
        g = ingest_swow([("a", "b", "R1", 1), ("b", "a", "R1", 1)])
        params = SpectralParams(beta=0.5, katz_mode="exact", dim=2, center=True)
        out = pipeline_katz(g, params)
        # hand-composed from the public single-step operations
        step1 = katz_index(to_adjacency(g), params)
        step2 = ppmi_transform(step1)
        step3 = l2_normalize_rows(step2)
        expected = pca_reduce(step3, 2, center=True)
        assert np.allclose(out.vectors, expected.vectors, atol=1e-8)
        assert out.vocab.words == expected.vocab.words

    def test_pipeline_pmi_shape_and_finiteness(self, toy_swow_records):
        g = self.swow_graph(toy_swow_records)
        emb = pipeline_pmi(g, SpectralParams(dim=3))
        assert emb.vectors.shape == (g.n_words, 3)
        assert np.all(np.isfinite(emb.vectors))

    def test_beta_zero_fails_in_ppmi(self):
        g = ingest_swow([("a", "b", "R1", 1), ("b", "a", "R1", 1)])
        params = SpectralParams(beta=0.0, katz_mode="truncated", truncation_order=3, dim=2)
        with pytest.raises(ValueError, match="all zero"):
            pipeline_katz(g, params)

    def test_pipeline_pmi_deterministic(self, toy_swow_records):
        g = self.swow_graph(toy_swow_records)
        a = pipeline_pmi(g, SpectralParams(dim=4))
        b = pipeline_pmi(g, SpectralParams(dim=4))
        assert np.array_equal(a.vectors, b.vectors)

    def test_sparse_path_matches_dense(self):
        g = make_sbm_graph(seed=9)
        dense = pipeline_pmi(g, SpectralParams(dim=5))
        sparse = pipeline_pmi(g, SpectralParams(dim=5), dense_limit=1)
        assert np.allclose(dense.vectors, sparse.vectors, atol=1e-7)

    def test_community_structure_recovered(self):
        gaps = []
        for seed in range(3):
            g = make_sbm_graph(seed=seed)
            emb = pipeline_pmi(g, SpectralParams(dim=8))
            gaps.append(block_cosine_gap(emb.vectors))
        assert sum(gap > 0 for gap in gaps) >= 2
