"""Prototype discovery and transitive alignment onto fixed-size grids.

Vertices from all graphs live in a common representation space (their
depth-based entropy vectors).  k-means finds M prototype points there;
every vertex is then assigned to its nearest prototype.  Two vertices
assigned to the same prototype are aligned with each other — the
relation is transitive by construction — so each graph can be pushed
onto a fixed M-row grid: row j of the grid aggregates the features and
edges of the vertices assigned to prototype j.  Averaging the grids
obtained at depths K = 1..L gives the final aligned grid structure.

Determinism is deliberate throughout (seeded farthest-point k-means
initialization, lowest-index tie-breaking): re-running alignment on the
same dataset and seed reproduces identical grids, and isomorphic graphs
produce identical grids because their representation multisets coincide
exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .depth import db_representation
from .graphs import Dataset


@dataclass
class PrototypeSet:
    """M cluster centroids in depth-K representation space.

    ``order_applied`` records whether rows have been put into the final
    degree-sorted order (see ``prototype_order``); ``objective_history``
    keeps the k-means objective after each assignment step, for
    convergence diagnostics.
    """

    K: int
    M: int
    centroids: np.ndarray  # (M, K)
    order_applied: bool = False
    objective_history: np.ndarray | None = None


@dataclass
class CorrespondenceMatrix:
    """0/1 vertex-to-prototype assignment; exactly one 1 per row."""

    entries: np.ndarray  # (|V_p|, M)


@dataclass
class AlignedGrid:
    """Fixed-size image of one graph: M-row features and M×M adjacency."""

    features: np.ndarray  # (M, c)
    adjacency: np.ndarray  # (M, M), symmetric nonnegative
    graph_index: int


def _pick_tied(values: np.ndarray, extremum: float, rng: np.random.Generator) -> int:
    """Index attaining `extremum`; the seed decides only among exact ties."""
    candidates = np.nonzero(values == extremum)[0]
    if len(candidates) == 1:
        return int(candidates[0])
    return int(rng.choice(candidates))


def _farthest_point_init(
    points: np.ndarray, M: int, rng: np.random.Generator
) -> np.ndarray:
    """Deterministic greedy seeding: start at the point nearest the global
    mean, then repeatedly take the point farthest from every chosen center."""
    to_mean = np.linalg.norm(points - points.mean(axis=0), axis=1)
    chosen = [_pick_tied(to_mean, to_mean.min(), rng)]
    nearest = np.linalg.norm(points - points[chosen[0]], axis=1)
    while len(chosen) < M:
        nxt = _pick_tied(nearest, nearest.max(), rng)
        chosen.append(nxt)
        nearest = np.minimum(
            nearest, np.linalg.norm(points - points[nxt], axis=1)
        )
    return points[chosen].astype(float).copy()


def kmeans_prototypes(
    points: np.ndarray,
    M: int,
    seed: int,
    max_iter: int = 300,
    tol: float = 1e-9,
) -> PrototypeSet:
    """Lloyd's k-means over vertex representations.

    Initialization is farthest-point seeding (see above); the seed only
    breaks exact distance ties, so runs are reproducible.  Assignment
    ties go to the lowest centroid index.  A cluster that loses all its
    points is re-seeded to the point currently farthest from its own
    centroid.  Iteration stops when the largest centroid movement drops
    below ``tol`` or after ``max_iter`` rounds.

    Asking for more prototypes than there are distinct points is
    reported with a warning and yields duplicate centroids.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[0] < 1:
        raise ValueError("points must be a non-empty 2-D array")
    if M < 1:
        raise ValueError("M must be >= 1")
    if not np.all(np.isfinite(points)):
        raise ValueError("points contain non-finite values")
    n, K = points.shape
    n_distinct = np.unique(points, axis=0).shape[0]
    if M > n_distinct:
        warnings.warn(
            f"requested {M} prototypes from {n_distinct} distinct points; "
            "duplicate centroids will result",
            stacklevel=2,
        )

    rng = np.random.default_rng(seed)
    centroids = _farthest_point_init(points, M, rng)
    history = []
    for _ in range(max_iter):
        distances = cdist(points, centroids)
        assign = np.argmin(distances, axis=1)
        # revive empty clusters with the point farthest from its centroid
        for j in range(M):
            if not np.any(assign == j):
                per_point = distances[np.arange(n), assign]
                centroids[j] = points[int(np.argmax(per_point))]
                distances[:, j] = np.linalg.norm(points - centroids[j], axis=1)
                assign = np.argmin(distances, axis=1)
        history.append(float(np.sum((points - centroids[assign]) ** 2)))
        updated = centroids.copy()
        for j in range(M):
            members = points[assign == j]
            if len(members):
                updated[j] = members.mean(axis=0)
        movement = float(np.linalg.norm(updated - centroids, axis=1).max())
        centroids = updated
        if movement < tol:
            break
    return PrototypeSet(
        K=K,
        M=M,
        centroids=centroids,
        order_applied=False,
        objective_history=np.array(history),
    )


def affinity_matrix(vertex_reps: np.ndarray, prototypes: PrototypeSet) -> np.ndarray:
    """Euclidean distance from every vertex representation to every centroid."""
    vertex_reps = np.asarray(vertex_reps, dtype=float)
    if vertex_reps.ndim != 2 or vertex_reps.shape[1] != prototypes.K:
        raise ValueError(
            f"vertex representations have {vertex_reps.shape} but prototypes "
            f"expect K={prototypes.K}"
        )
    return cdist(vertex_reps, prototypes.centroids)


def correspondence_matrix(affinity: np.ndarray) -> CorrespondenceMatrix:
    """One-hot row argmin of the affinity matrix.

    Ties break toward the smallest prototype index, so the assignment —
    and everything downstream — is deterministic.
    """
    affinity = np.asarray(affinity, dtype=float)
    if affinity.ndim != 2 or affinity.size == 0:
        raise ValueError("affinity matrix must be non-empty and 2-D")
    if np.any(np.isnan(affinity)):
        raise ValueError("affinity matrix contains NaN")
    winners = np.argmin(affinity, axis=1)
    entries = np.zeros_like(affinity)
    entries[np.arange(affinity.shape[0]), winners] = 1.0
    return CorrespondenceMatrix(entries=entries)


def prototype_order(prototypes: PrototypeSet) -> np.ndarray:
    """Permutation sorting prototypes by descending degree.

    The degree of centroid j is Σ_k exp(−‖μ_j − μ_k‖₂ / K) over all
    centroids including itself (self term = 1): an average-similarity
    score that puts the most central prototype first.  Ties keep the
    original index order.
    """
    c = prototypes.centroids
    similarity = np.exp(-cdist(c, c) / prototypes.K)
    degree = similarity.sum(axis=1)
    return np.lexsort((np.arange(prototypes.M), -degree))


def apply_prototype_order(
    prototypes: PrototypeSet, order: np.ndarray | None = None
) -> PrototypeSet:
    """Reorder centroid rows by ``order`` (default: their own degree sort)."""
    if order is None:
        order = prototype_order(prototypes)
    return PrototypeSet(
        K=prototypes.K,
        M=prototypes.M,
        centroids=prototypes.centroids[np.asarray(order)].copy(),
        order_applied=True,
        objective_history=prototypes.objective_history,
    )


def aligned_grid_level(
    X_p: np.ndarray, A_p: np.ndarray, C: CorrespondenceMatrix
) -> tuple[np.ndarray, np.ndarray]:
    """Push one graph through a correspondence: (CᵀX, CᵀAC).

    Row j of CᵀX sums the features of the vertices assigned to
    prototype j, so feature column sums are preserved; likewise
    Σ(CᵀAC) = ΣA.  With 0/1 inputs the transport is integer-exact.
    """
    X_p = np.asarray(X_p, dtype=float)
    A_p = np.asarray(A_p, dtype=float)
    entries = C.entries
    if X_p.shape[0] != entries.shape[0] or A_p.shape[0] != entries.shape[0]:
        raise ValueError(
            f"row counts disagree: X {X_p.shape}, A {A_p.shape}, C {entries.shape}"
        )
    if A_p.shape[0] != A_p.shape[1]:
        raise ValueError(f"adjacency must be square, got {A_p.shape}")
    return entries.T @ X_p, entries.T @ A_p @ entries


def graph_db_matrix(graph, L: int) -> np.ndarray:
    """Depth-L representations of one graph's vertices, stacked as rows."""
    return np.vstack([db_representation(graph, v, L).values for v in range(graph.n)])


def aligned_grid(
    graph_index: int,
    dataset: Dataset,
    prototypes_per_level: list[PrototypeSet],
    features: np.ndarray,
) -> AlignedGrid:
    """Average the per-level grids of one graph into its final grid.

    Level K aligns the graph's depth-K vertex representations (the
    depth-L vectors truncated to their first K entries) against the
    level-K prototype set; the L resulting (X̂, Â) pairs are averaged
    entrywise.  All prototype sets must share M and already be in final
    order so that row j means the same thing at every level.
    """
    L = len(prototypes_per_level)
    if L < 1:
        raise ValueError("need at least one prototype level")
    M = prototypes_per_level[0].M
    for k, proto in enumerate(prototypes_per_level, start=1):
        if proto.M != M:
            raise ValueError(f"level {k} has M={proto.M}, expected {M}")
        if proto.K != k:
            raise ValueError(f"level {k} prototype set has depth K={proto.K}")
        if not proto.order_applied:
            raise ValueError(f"level {k} prototype set is not ordered")
    graph = dataset.graphs[graph_index]
    features = np.asarray(features, dtype=float)
    if features.shape[0] != graph.n:
        raise ValueError(
            f"features have {features.shape[0]} rows for a graph with n={graph.n}"
        )
    reps = graph_db_matrix(graph, L)
    feat_sum = np.zeros((M, features.shape[1]))
    adj_sum = np.zeros((M, M))
    for k, proto in enumerate(prototypes_per_level, start=1):
        C = correspondence_matrix(affinity_matrix(reps[:, :k], proto))
        Xh, Ah = aligned_grid_level(features, graph.adjacency, C)
        feat_sum += Xh
        adj_sum += Ah
    return AlignedGrid(
        features=feat_sum / L, adjacency=adj_sum / L, graph_index=graph_index
    )


def discover_prototypes(
    dataset: Dataset,
    M: int,
    L: int,
    seed: int,
    graph_indices: list[int] | None = None,
    max_iter: int = 300,
    tol: float = 1e-9,
) -> list[PrototypeSet]:
    """Cluster vertex representations into one prototype set per depth.

    Depth-L representations are computed for every vertex of the chosen
    graphs (all graphs by default — the transductive setting; pass
    training indices for the inductive variant).  Level K clusters the
    K-column truncation.  A single ordering, computed from the level-L
    set, is applied to every level so grid rows stay consistent across
    the level average.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if graph_indices is None:
        graph_indices = list(range(len(dataset)))
    blocks = [graph_db_matrix(dataset.graphs[p], L) for p in graph_indices]
    reps = np.vstack(blocks)
    sets = [
        kmeans_prototypes(reps[:, :k], M, seed=seed, max_iter=max_iter, tol=tol)
        for k in range(1, L + 1)
    ]
    order = prototype_order(sets[-1])
    return [apply_prototype_order(proto, order) for proto in sets]


def save_prototypes(path: str, prototypes: PrototypeSet, L: int, seed: int) -> None:
    """Write one prototype set as text: `K M L seed` header + centroid rows."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"{prototypes.K} {prototypes.M} {L} {seed}\n")
        for row in prototypes.centroids:
            fh.write(" ".join(format(x, ".17g") for x in row))
            fh.write("\n")


def load_prototypes(path: str) -> tuple[PrototypeSet, int, int]:
    """Read a prototype file; rows are stored in final order."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 4:
            raise ValueError(f"malformed prototype header in {path}")
        K, M, L, seed = (int(tok) for tok in header)
        centroids = np.loadtxt(fh, ndmin=2)
    if centroids.shape != (M, K):
        raise ValueError(
            f"prototype file {path} holds {centroids.shape}, header says ({M}, {K})"
        )
    return (
        PrototypeSet(K=K, M=M, centroids=centroids, order_applied=True),
        L,
        seed,
    )
