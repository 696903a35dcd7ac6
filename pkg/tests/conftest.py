"""Shared fixtures: seeded random-graph corpora and small datasets."""

import os

# Repeated runs must be bitwise identical, which rules out threaded BLAS
# reductions; set before numpy is first imported.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np
import pytest

from qwgrid.graphs import Dataset, Graph
from qwgrid.synth import make_two_class_dataset


def random_graph(rng, n, p=0.4, labels=None):
    """Simple undirected graph on n vertices with edge probability p."""
    upper = np.triu(rng.random((n, n)) < p, k=1).astype(float)
    adjacency = upper + upper.T
    vertex_labels = None
    if labels is not None:
        vertex_labels = tuple(int(x) for x in rng.integers(0, labels, size=n))
    return Graph(adjacency=adjacency, vertex_labels=vertex_labels)


def random_connected_graph(rng, n, p=0.3, labels=None):
    """Random graph plus a random spanning tree, so it is connected."""
    g = random_graph(rng, n, p, labels=labels)
    adjacency = g.adjacency
    for v in range(1, n):
        u = int(rng.integers(0, v))
        adjacency[u, v] = adjacency[v, u] = 1.0
    return Graph(adjacency=adjacency, vertex_labels=g.vertex_labels)


def permuted_graph(graph, perm):
    """Relabel vertices of a graph by the permutation array `perm`."""
    perm = np.asarray(perm)
    adjacency = graph.adjacency[np.ix_(perm, perm)]
    labels = None
    if graph.vertex_labels is not None:
        labels = tuple(graph.vertex_labels[i] for i in perm)
    return Graph(adjacency=adjacency, vertex_labels=labels)


def small_dataset(rng, n_graphs=8, n_lo=5, n_hi=10, n_labels=3, name="toy"):
    """Dataset of random connected labeled graphs with alternating classes."""
    graphs = [
        random_connected_graph(rng, int(rng.integers(n_lo, n_hi + 1)), labels=n_labels)
        for _ in range(n_graphs)
    ]
    class_labels = np.array([g % 2 for g in range(n_graphs)], dtype=int)
    return Dataset(
        name=name,
        graphs=graphs,
        class_labels=class_labels,
        label_alphabet=tuple(range(n_labels)),
    )


@pytest.fixture(scope="session")
def benchmark_dataset():
    """The bundled 188-graph two-class benchmark (degree-regular rings
    with chords vs. hub-heavy densified trees)."""
    return make_two_class_dataset()


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
