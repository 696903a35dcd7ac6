"""Graph and dataset containers plus TU benchmark text-format I/O.

The TU format describes a whole dataset with a handful of plain text
files sharing a common ``<name>_`` prefix:

    <name>_A.txt                edge list, 1-based ``i, j`` pairs
    <name>_graph_indicator.txt  line k = graph id of vertex k (1-based)
    <name>_graph_labels.txt     line g = class label of graph g
    <name>_node_labels.txt      line k = integer label of vertex k (optional)

Vertices and graphs are renumbered to 0-based on load, duplicate and
reversed edge lines are merged into single undirected edges, and class
labels are remapped to contiguous 0-based integers in sorted order of
the raw values.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Graph:
    """Undirected graph: symmetric adjacency plus optional vertex labels.

    Raw input graphs are simple (0/1 entries, zero diagonal); graphs
    produced by alignment carry nonnegative real weights instead.
    """

    adjacency: np.ndarray
    vertex_labels: tuple[int, ...] | None = None

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def degrees(self) -> np.ndarray:
        """Unweighted degrees: number of neighbors with positive weight."""
        return np.count_nonzero(self.adjacency > 0, axis=1)

    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.adjacency) > 0))


@dataclass
class Dataset:
    """A named collection of graphs with one class label per graph."""

    name: str
    graphs: list[Graph]
    class_labels: np.ndarray
    label_alphabet: tuple[int, ...] = field(default_factory=tuple)

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def n_classes(self) -> int:
        return int(self.class_labels.max()) + 1 if len(self.class_labels) else 0

    @property
    def has_vertex_labels(self) -> bool:
        return len(self.label_alphabet) > 0


def _read_int_lines(path: str, what: str) -> list[int]:
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            token = line.strip()
            if not token:
                continue  # trailing blank line tolerated
            try:
                values.append(int(token))
            except ValueError:
                raise ValueError(
                    f"{what}: non-integer token {token!r} at line {lineno} of {path}"
                ) from None
    return values


def _read_edge_lines(path: str) -> list[tuple[int, int]]:
    edges = []
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            parts = stripped.split(",")
            if len(parts) != 2:
                raise ValueError(
                    f"edge list: expected 'i, j' at line {lineno} of {path}, got {stripped!r}"
                )
            try:
                i, j = int(parts[0].strip()), int(parts[1].strip())
            except ValueError:
                raise ValueError(
                    f"edge list: non-integer token at line {lineno} of {path}"
                ) from None
            edges.append((i, j))
    return edges


def load_tu_dataset(directory_path: str, name: str) -> Dataset:
    """Load a TU-format dataset from ``directory_path``.

    Parameters
    ----------
    directory_path : str
        Directory holding the ``<name>_*.txt`` files.
    name : str
        Dataset file prefix (also stored as ``Dataset.name``).

    Returns
    -------
    Dataset
        Graphs with 0-based vertices, deduplicated symmetric edges, and
        class labels remapped to contiguous 0-based integers.

    Raises
    ------
    FileNotFoundError
        A mandatory file is missing.
    ValueError
        Malformed content: non-integer tokens, edges referencing unknown
        vertices, self-loops, graphs with no vertices, or count mismatches.
    """
    paths = {
        key: os.path.join(directory_path, f"{name}_{key}.txt")
        for key in ("A", "graph_indicator", "graph_labels", "node_labels")
    }
    for key in ("A", "graph_indicator", "graph_labels"):
        if not os.path.isfile(paths[key]):
            raise FileNotFoundError(f"missing mandatory file: {paths[key]}")

    indicator = _read_int_lines(paths["graph_indicator"], "graph indicator")
    n_vertices = len(indicator)
    if n_vertices == 0:
        raise ValueError("graph indicator file is empty")
    n_graphs = max(indicator)
    if min(indicator) < 1:
        raise ValueError("graph indicator: graph ids must be >= 1")

    sizes = np.zeros(n_graphs, dtype=int)
    for gid in indicator:
        sizes[gid - 1] += 1
    empty = np.nonzero(sizes == 0)[0]
    if empty.size:
        raise ValueError(f"graph {empty[0] + 1} has no vertices assigned")

    # vertex k (1-based) -> (graph index, local vertex index), in file order
    local = np.zeros(n_vertices, dtype=int)
    owner = np.zeros(n_vertices, dtype=int)
    counters = np.zeros(n_graphs, dtype=int)
    for k, gid in enumerate(indicator):
        owner[k] = gid - 1
        local[k] = counters[gid - 1]
        counters[gid - 1] += 1

    adjacencies = [np.zeros((s, s)) for s in sizes]
    for i, j in _read_edge_lines(paths["A"]):
        if not (1 <= i <= n_vertices and 1 <= j <= n_vertices):
            raise ValueError(f"edge ({i}, {j}) references unknown vertex")
        if i == j:
            raise ValueError(f"self-loop on vertex {i} is not allowed")
        gi, gj = owner[i - 1], owner[j - 1]
        if gi != gj:
            raise ValueError(f"edge ({i}, {j}) crosses graphs {gi + 1} and {gj + 1}")
        adjacencies[gi][local[i - 1], local[j - 1]] = 1.0
        adjacencies[gi][local[j - 1], local[i - 1]] = 1.0

    raw_classes = _read_int_lines(paths["graph_labels"], "graph labels")
    if len(raw_classes) != n_graphs:
        raise ValueError(
            f"graph labels: {len(raw_classes)} lines for {n_graphs} graphs"
        )
    remap = {raw: k for k, raw in enumerate(sorted(set(raw_classes)))}
    class_labels = np.array([remap[raw] for raw in raw_classes], dtype=int)

    node_labels: list[int] | None = None
    if os.path.isfile(paths["node_labels"]):
        node_labels = _read_int_lines(paths["node_labels"], "node labels")
        if len(node_labels) != n_vertices:
            raise ValueError(
                f"node labels: {len(node_labels)} lines for {n_vertices} vertices"
            )

    graphs = []
    for g in range(n_graphs):
        labels = None
        if node_labels is not None:
            labels = tuple(
                node_labels[k] for k in range(n_vertices) if owner[k] == g
            )
        graphs.append(Graph(adjacency=adjacencies[g], vertex_labels=labels))

    alphabet: tuple[int, ...] = ()
    if node_labels is not None:
        alphabet = tuple(sorted(set(node_labels)))

    return Dataset(
        name=name, graphs=graphs, class_labels=class_labels, label_alphabet=alphabet
    )


def save_tu_dataset(dataset: Dataset, directory_path: str) -> None:
    """Write ``dataset`` in TU format (both edge directions, 1-based ids)."""
    os.makedirs(directory_path, exist_ok=True)
    name = dataset.name
    offset = 0
    a_lines, ind_lines, node_lines = [], [], []
    for g, graph in enumerate(dataset.graphs):
        n = graph.n
        ind_lines.extend(str(g + 1) for _ in range(n))
        if graph.vertex_labels is not None:
            node_lines.extend(str(lbl) for lbl in graph.vertex_labels)
        rows, cols = np.nonzero(graph.adjacency > 0)
        for i, j in zip(rows, cols):
            a_lines.append(f"{offset + i + 1}, {offset + j + 1}")
        offset += n

    def write(suffix: str, lines: list[str]) -> None:
        with open(
            os.path.join(directory_path, f"{name}_{suffix}.txt"),
            "w",
            encoding="ascii",
        ) as fh:
            fh.write("\n".join(lines))
            fh.write("\n")

    write("A", a_lines)
    write("graph_indicator", ind_lines)
    write("graph_labels", [str(c) for c in dataset.class_labels])
    if node_lines:
        write("node_labels", node_lines)


def one_hot_features(dataset: Dataset, graph_index: int) -> np.ndarray:
    """One-hot encode the vertex labels of one graph over the dataset alphabet.

    Row i has a single 1 at the alphabet position of vertex i's label.
    """
    graph = dataset.graphs[graph_index]
    if graph.vertex_labels is None:
        raise ValueError("graph carries no vertex labels")
    position = {label: k for k, label in enumerate(dataset.label_alphabet)}
    features = np.zeros((graph.n, len(dataset.label_alphabet)))
    for i, label in enumerate(graph.vertex_labels):
        if label not in position:
            raise ValueError(f"vertex label {label} absent from alphabet")
        features[i, position[label]] = 1.0
    return features


def degree_alphabet(dataset: Dataset) -> tuple[int, ...]:
    """Sorted distinct vertex degrees over the whole dataset."""
    degrees: set[int] = set()
    for graph in dataset.graphs:
        degrees.update(int(d) for d in graph.degrees())
    return tuple(sorted(degrees))


def degree_features(dataset: Dataset, graph_index: int) -> np.ndarray:
    """One-hot encode vertex degrees over the dataset-wide degree alphabet.

    Used for unattributed datasets, where the degree stands in for the
    vertex label; the alphabet spans all graphs so the feature dimension
    is shared.
    """
    alphabet = degree_alphabet(dataset)
    position = {d: k for k, d in enumerate(alphabet)}
    graph = dataset.graphs[graph_index]
    features = np.zeros((graph.n, len(alphabet)))
    for i, d in enumerate(graph.degrees()):
        features[i, position[int(d)]] = 1.0
    return features


def vertex_features(dataset: Dataset, graph_index: int) -> np.ndarray:
    """Feature matrix for one graph: one-hot labels, or degrees if unlabeled."""
    if dataset.has_vertex_labels:
        return one_hot_features(dataset, graph_index)
    return degree_features(dataset, graph_index)


def feature_dimension(dataset: Dataset) -> int:
    if dataset.has_vertex_labels:
        return len(dataset.label_alphabet)
    return len(degree_alphabet(dataset))


def validate_graph(graph: Graph) -> list[str]:
    """Check Graph invariants; returns one diagnostic string per violation."""
    diagnostics = []
    a = graph.adjacency
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return [f"adjacency is not square: shape {a.shape}"]
    if not np.all(np.isfinite(a)):
        diagnostics.append("adjacency contains non-finite entries")
    else:
        if not np.array_equal(a, a.T):
            i, j = np.argwhere(a != a.T)[0]
            diagnostics.append(f"adjacency is asymmetric at ({i}, {j})")
        if np.any(a < 0):
            i, j = np.argwhere(a < 0)[0]
            diagnostics.append(f"negative entry at ({i}, {j})")
        if np.any(np.diag(a) != 0):
            i = int(np.nonzero(np.diag(a))[0][0])
            diagnostics.append(f"nonzero diagonal at vertex {i}")
    if graph.vertex_labels is not None and len(graph.vertex_labels) != graph.n:
        diagnostics.append(
            f"vertex_labels length {len(graph.vertex_labels)} != n {graph.n}"
        )
    return diagnostics
