"""Deterministic synthetic two-class graph benchmark.

Generates a labeled-graph dataset with the same rough dimensions as the
classic small molecular benchmarks (a few hundred graphs, ~18 vertices
each, 7 vertex-label values, two imbalanced classes) for tests and
demos that need a classification task without shipping external data.

The two classes differ in connectivity style and in vertex-label
mixture, so both the structural half of the pipeline (entropy profiles,
mixing matrices) and the feature half (one-hot label mass) carry class
signal:

* class 0 — a ring with a few random chords: degrees concentrate at 2–3;
* class 1 — a random tree densified by degree-weighted extra edges:
  hubs emerge and the degree spread widens.

Everything is drawn from one seeded generator, so the same arguments
always produce the identical dataset.
"""

from __future__ import annotations

import numpy as np

from .graphs import Dataset, Graph

LABEL_ALPHABET = (0, 1, 2, 3, 4, 5, 6)
_CLASS0_LABEL_PROBS = np.array([0.30, 0.22, 0.16, 0.12, 0.09, 0.07, 0.04])
_CLASS1_LABEL_PROBS = _CLASS0_LABEL_PROBS[::-1].copy()


def _ring_with_chords(rng: np.random.Generator, n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for i in range(n):
        j = (i + 1) % n
        A[i, j] = A[j, i] = 1.0
    chords = max(1, n // 6)
    placed = 0
    while placed < chords:
        i, j = rng.integers(0, n, size=2)
        if i == j or A[i, j]:
            continue
        A[i, j] = A[j, i] = 1.0
        placed += 1
    return A


def _hubby_tree(rng: np.random.Generator, n: int) -> np.ndarray:
    A = np.zeros((n, n))
    for v in range(1, n):
        parent = int(rng.integers(0, v))
        A[v, parent] = A[parent, v] = 1.0
    extra = n
    placed = 0
    attempts = 0
    while placed < extra and attempts < 50 * extra:
        attempts += 1
        degrees = A.sum(axis=1)
        weights = degrees / degrees.sum()
        i = int(rng.choice(n, p=weights))
        j = int(rng.integers(0, n))
        if i == j or A[i, j]:
            continue
        A[i, j] = A[j, i] = 1.0
        placed += 1
    return A


def make_two_class_dataset(
    n_graphs: int = 188,
    seed: int = 20240811,
    name: str = "SYNTH2",
    class0_fraction: float = 0.665,
) -> Dataset:
    """Build the benchmark: ``class0_fraction`` ring graphs, the rest hubby.

    Graph sizes are drawn around 18 vertices (clipped to [12, 26]);
    vertex labels come from class-conditional mixtures over a 7-letter
    alphabet.
    """
    rng = np.random.default_rng(seed)
    n_class0 = int(round(n_graphs * class0_fraction))
    graphs = []
    class_labels = []
    for g in range(n_graphs):
        cls = 0 if g < n_class0 else 1
        n = int(np.clip(round(rng.normal(18.0, 3.5)), 12, 26))
        if cls == 0:
            A = _ring_with_chords(rng, n)
            probs = _CLASS0_LABEL_PROBS
        else:
            A = _hubby_tree(rng, n)
            probs = _CLASS1_LABEL_PROBS
        labels = tuple(int(x) for x in rng.choice(len(LABEL_ALPHABET), size=n, p=probs))
        graphs.append(Graph(adjacency=A, vertex_labels=labels))
        class_labels.append(cls)
    return Dataset(
        name=name,
        graphs=graphs,
        class_labels=np.array(class_labels, dtype=int),
        label_alphabet=LABEL_ALPHABET,
    )
