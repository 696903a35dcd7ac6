"""Depth-based vertex representations.

Each vertex is described by a K-vector of Shannon entropies: entry k−1
is the entropy of the steady-state random-walk distribution on the
vertex-induced subgraph spanned by everything within k hops of the
vertex.  Growing balls probe progressively wider structure, and the
entropy of the degree distribution is blind to vertex ordering, so two
isomorphic graphs yield identical (bit-for-bit) representation sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Dataset, Graph


@dataclass
class DBRepresentation:
    """Entropy profile of one vertex's expanding neighborhood balls."""

    vertex_id: int
    values: np.ndarray  # length K; values[k-1] = entropy of the k-hop ball


def hop_distances(graph: Graph, root: int) -> np.ndarray:
    """BFS distances from root over unweighted edges; -1 = unreachable."""
    n = graph.n
    dist = np.full(n, -1, dtype=int)
    dist[root] = 0
    frontier = [root]
    d = 0
    adjacency = graph.adjacency
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for v in np.nonzero(adjacency[u] > 0)[0]:
                if dist[v] < 0:
                    dist[v] = d
                    nxt.append(int(v))
        frontier = nxt
    return dist


def expansion_subgraph(graph: Graph, root: int, k: int) -> Graph:
    """Vertex-induced subgraph on the ball of radius k around root.

    Retains every edge of the parent graph between retained vertices;
    vertices keep their relative order.
    """
    if not 0 <= root < graph.n:
        raise ValueError(f"root {root} out of range for n={graph.n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    dist = hop_distances(graph, root)
    keep = np.nonzero((dist >= 0) & (dist <= k))[0]
    sub = graph.adjacency[np.ix_(keep, keep)]
    labels = None
    if graph.vertex_labels is not None:
        labels = tuple(graph.vertex_labels[i] for i in keep)
    return Graph(adjacency=sub, vertex_labels=labels)


def steady_state_entropy(graph: Graph) -> float:
    """Entropy of the degree-proportional stationary distribution.

    With d_v the vertex degrees and D their sum, the steady state of a
    random walk is π_v = d_v / D; returns −Σ π_v ln π_v with the usual
    0·ln 0 = 0 convention.  An edgeless graph (D = 0) maps to 0.

    The degrees are sorted before summation: entropy is a function of
    the degree multiset only, which makes the value exactly (not just
    approximately) invariant under vertex reordering.
    """
    degrees = np.sort(graph.degrees())
    total = degrees.sum()
    if total == 0:
        return 0.0
    pi = degrees[degrees > 0] / total
    return float(-np.sum(pi * np.log(pi)))


def db_representation(graph: Graph, root: int, K: int) -> DBRepresentation:
    """K-vector of ball entropies rooted at one vertex.

    values[k−1] = steady_state_entropy(expansion_subgraph(graph, root, k)).
    Once the ball swallows the root's connected component the entries
    stop changing, so the tail is constant.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if not 0 <= root < graph.n:
        raise ValueError(f"root {root} out of range for n={graph.n}")
    dist = hop_distances(graph, root)
    reach = dist[dist >= 0]
    eccentricity = int(reach.max())
    values = np.zeros(K)
    previous = None
    for k in range(1, K + 1):
        if previous is not None and k > eccentricity:
            values[k - 1] = previous  # ball saturated the component
            continue
        previous = steady_state_entropy(expansion_subgraph(graph, root, k))
        values[k - 1] = previous
    return DBRepresentation(vertex_id=root, values=values)


def dataset_db_representations(
    dataset: Dataset, K: int
) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """Stack the depth-K representations of every vertex of every graph.

    Returns
    -------
    matrix : ndarray, shape (total vertices, K)
        Row order: graphs in dataset order, vertices in adjacency order.
    index : list of (graph_index, vertex_index)
        Row r of the matrix belongs to ``index[r]``.
    """
    rows = []
    index = []
    for p, graph in enumerate(dataset.graphs):
        for v in range(graph.n):
            rows.append(db_representation(graph, v, K).values)
            index.append((p, v))
    matrix = np.vstack(rows) if rows else np.zeros((0, K))
    return matrix, index
