import numpy as np
import pytest
import scipy.stats

from kbembed.graph import LexicalGraph, ingest_edge_list, ingest_swow
from kbembed.vocab import Vocabulary
from kbembed.walk import WalkCorpus, WalkParams, generate_walk_corpus, save_corpus


class TestWalkGeneration:
    def test_alpha_zero_gives_singleton_walks(self, triangle_graph):
        corpus = generate_walk_corpus(
            triangle_graph, WalkParams(alpha=0.0, token_budget=200, seed=1)
        )
        assert all(len(w) == 1 for w in corpus.walks)
        assert corpus.n_tokens >= 200

    def test_same_seed_identical_different_seed_not(self, triangle_graph):
        p = WalkParams(alpha=0.6, token_budget=500, seed=42)
        a = generate_walk_corpus(triangle_graph, p)
        b = generate_walk_corpus(triangle_graph, p)
        assert len(a.walks) == len(b.walks)
        assert all(np.array_equal(x, y) for x, y in zip(a.walks, b.walks))
        c = generate_walk_corpus(triangle_graph, WalkParams(alpha=0.6, token_budget=500, seed=43))
        assert any(
            len(x) != len(y) or not np.array_equal(x, y) for x, y in zip(a.walks, c.walks)
        )

    def test_mean_length_matches_geometric(self, triangle_graph):
        alpha = 0.85
        corpus = generate_walk_corpus(
            triangle_graph,
            WalkParams(alpha=alpha, token_budget=700_000, max_walk_len=10**9, seed=7),
        )
        lengths = np.array([len(w) for w in corpus.walks])
        assert len(lengths) >= 100_000
        target = 1.0 / (1.0 - alpha)
        assert abs(lengths.mean() - target) / target < 0.02

    def test_length_distribution_is_geometric(self, triangle_graph):
        alpha = 0.6
        corpus = generate_walk_corpus(
            triangle_graph,
            WalkParams(alpha=alpha, token_budget=270_000, max_walk_len=10**9, seed=11),
        )
        lengths = np.array([len(w) for w in corpus.walks])
        assert len(lengths) >= 100_000
        cap = 12
        observed = np.array(
            [(lengths == k).sum() for k in range(1, cap)] + [(lengths >= cap).sum()]
        )
        probs = np.array(
            [(1 - alpha) * alpha ** (k - 1) for k in range(1, cap)] + [alpha ** (cap - 1)]
        )
        result = scipy.stats.chisquare(observed, probs * len(lengths))
        assert result.pvalue > 0.01

    def test_neighbor_frequencies_follow_weights(self):
        g = ingest_swow(
            [("hub", "a", "R1", 1), ("hub", "b", "R1", 2), ("hub", "c", "R1", 7),
             ("a", "hub", "R1", 1), ("b", "hub", "R1", 1), ("c", "hub", "R1", 1)]
        )
        corpus = generate_walk_corpus(
            g, WalkParams(alpha=0.95, token_budget=400_000, max_walk_len=10**9, seed=3)
        )
        hub = g.vocab.id_of("hub")
        following = []
        for walk in corpus.walks:
            idx = np.flatnonzero(walk[:-1] == hub)
            following.extend(walk[idx + 1])
        counts = np.bincount(following, minlength=g.n_words).astype(float)
        counts = counts[[g.vocab.id_of(w) for w in ("a", "b", "c")]]
        assert counts.sum() >= 100_000
        freqs = counts / counts.sum()
        assert np.all(np.abs(freqs - np.array([0.1, 0.2, 0.7])) < 0.02)

    def test_dead_end_stops_walk(self):
        g = ingest_edge_list([("a", "r", "b")])  # b has no out-edges
        corpus = generate_walk_corpus(
            g, WalkParams(alpha=0.99, token_budget=2000, max_walk_len=10**9, seed=5)
        )
        assert max(len(w) for w in corpus.walks) <= 2

    def test_max_walk_len_cap(self, triangle_graph):
        corpus = generate_walk_corpus(
            triangle_graph, WalkParams(alpha=0.999, token_budget=5000, max_walk_len=4, seed=9)
        )
        assert max(len(w) for w in corpus.walks) == 4

    def test_empty_graph_errors(self):
        g = LexicalGraph(vocab=Vocabulary(), edges={}, relation_labels=set())
        with pytest.raises(ValueError, match="empty"):
            generate_walk_corpus(g, WalkParams(token_budget=10))

    def test_params_validation(self):
        with pytest.raises(ValueError):
            WalkParams(alpha=1.0)
        with pytest.raises(ValueError):
            WalkParams(token_budget=0)


class TestCorpusExport:
    def test_one_walk_per_line_with_underscores(self, tmp_path):
        vocab = Vocabulary(["ice cream", "cold"])
        corpus = WalkCorpus(walks=[np.array([0, 1]), np.array([1])], vocab=vocab)
        path = tmp_path / "corpus.txt"
        save_corpus(corpus, path)
        assert path.read_text() == "ice_cream cold\ncold\n"
