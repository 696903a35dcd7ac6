"""Depth-based entropy profiles of individual vertices.

A vertex is summarized by the entropies of its expanding k-hop
neighborhood balls.  Structurally different positions (path endpoint,
path middle, star hub, ring vertex) get visibly different profiles,
while every vertex of a vertex-transitive graph gets the same one.
"""

import numpy as np

from qwgrid.depth import db_representation
from qwgrid.graphs import Graph


def ring(n):
    a = np.zeros((n, n))
    for i in range(n):
        a[i, (i + 1) % n] = a[(i + 1) % n, i] = 1.0
    return Graph(adjacency=a)


def path(n):
    a = np.zeros((n, n))
    for i in range(n - 1):
        a[i, i + 1] = a[i + 1, i] = 1.0
    return Graph(adjacency=a)


def star(n):
    a = np.zeros((n, n))
    a[0, 1:] = a[1:, 0] = 1.0
    return Graph(adjacency=a)


K = 4
cases = [
    ("path endpoint", path(7), 0),
    ("path middle", path(7), 3),
    ("star hub", star(7), 0),
    ("star leaf", star(7), 1),
    ("ring vertex", ring(7), 0),
]
for name, graph, v in cases:
    values = db_representation(graph, v, K).values
    print(f"{name:13s}: " + "  ".join(f"{x:.4f}" for x in values))

print("\nring vertices all share one profile (vertex-transitive):")
profiles = {tuple(db_representation(ring(7), v, K).values) for v in range(7)}
print(f"distinct profiles among 7 ring vertices: {len(profiles)}")
