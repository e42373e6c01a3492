import numpy as np
import pytest

from kbembed.graph import LexicalGraph, ingest_edge_list
from kbembed.vocab import Vocabulary


@pytest.fixture
def toy_swow_records():
    return [
        ("kite", "string", "R1", 13),
        ("kite", "sky", "R1", 9),
        ("string", "kite", "R1", 5),
        ("sky", "blue", "R1", 7),
        ("blue", "sky", "R1", 6),
        ("blue", "color", "R2", 3),
        ("color", "blue", "R1", 4),
        ("sky", "cloud", "R2", 2),
        ("cloud", "sky", "R1", 5),
        ("cloud", "rain", "R2", 3),
        ("rain", "cloud", "R1", 4),
        ("rain", "wet", "R2", 2),
        ("wet", "rain", "R1", 3),
    ]


@pytest.fixture
def triangle_graph():
    return ingest_edge_list([("a", "r", "b"), ("b", "r", "c"), ("c", "r", "a")])


def make_sbm_graph(seed, block_size=15, n_blocks=2, p_in=0.5, p_out=0.05):
    """Directed stochastic-block-model graph with unit edge weights.

    Every node gets at least one within-block out-edge so walks never
    start on an isolated node.
    """
    rng = np.random.default_rng(seed)
    n = block_size * n_blocks
    words = [f"w{i:02d}" for i in range(n)]
    vocab = Vocabulary(words)
    edges = {}
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            same = i // block_size == j // block_size
            if rng.random() < (p_in if same else p_out):
                edges[(i, "r", j)] = 1.0
    for i in range(n):
        if not any(src == i for (src, _rel, _dst) in edges):
            block = i // block_size
            j = block * block_size + int(rng.integers(block_size))
            if j == i:
                j = block * block_size + (i + 1 - block * block_size) % block_size
            edges[(i, "r", j)] = 1.0
    return LexicalGraph(vocab=vocab, edges=edges, relation_labels={"r"})


def block_cosine_gap(vectors, block_size=15):
    """Mean within-block minus mean cross-block cosine similarity."""
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    unit = vectors / np.where(norms > 0, norms, 1.0)
    sims = unit @ unit.T
    n = len(vectors)
    within, cross = [], []
    for i in range(n):
        for j in range(i + 1, n):
            (within if i // block_size == j // block_size else cross).append(sims[i, j])
    return float(np.mean(within) - np.mean(cross))


def central_difference(f, x, eps=1e-6):
    """Central finite-difference gradient of scalar f at flat array x."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for k in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp.flat[k] += eps
        xm.flat[k] -= eps
        grad.flat[k] = (f(xp) - f(xm)) / (2 * eps)
    return grad
