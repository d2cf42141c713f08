"""Reference implementations the kernels are checked against.

Nothing here touches simulated memory: plain Python / numpy over an edge
list, written to be obviously correct rather than fast.
"""

from __future__ import annotations

from collections import deque

import numpy as np

UNREACHED = np.iinfo(np.int64).max


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


def component_min_labels(edges, n: int) -> np.ndarray:
    """Label every vertex with the smallest vertex id of its component."""
    uf = UnionFind(n)
    for i, j in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist():
        uf.union(i, j)
    roots = [uf.find(v) for v in range(n)]
    smallest = {}
    for v, r in enumerate(roots):
        smallest.setdefault(r, v)
    return np.array([smallest[r] for r in roots], dtype=np.int64)


def adjacency_lists(edges, n: int) -> list:
    adj = [[] for _ in range(n)]
    for i, j in np.asarray(edges, dtype=np.int64).reshape(-1, 2).tolist():
        if i != j:
            adj[i].append(j)
            adj[j].append(i)
    return adj


def fifo_bfs_levels(adj, source: int) -> np.ndarray:
    """Textbook queue BFS; unreached vertices hold ``UNREACHED``."""
    level = [UNREACHED] * len(adj)
    level[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if level[w] == UNREACHED:
                level[w] = level[u] + 1
                queue.append(w)
    return np.array(level, dtype=np.int64)


def forest_depths(labels) -> np.ndarray:
    """Depth of each vertex in the forest ``v -> labels[v]`` (roots are 0)."""
    labels = [int(x) for x in labels]
    depth = [-1] * len(labels)
    for v in range(len(labels)):
        path = []
        x = v
        while depth[x] < 0 and labels[x] != x:
            path.append(x)
            x = labels[x]
        base = depth[x] if depth[x] >= 0 else 0
        depth[x] = base
        for k, y in enumerate(reversed(path), start=1):
            depth[y] = base + k
    return np.array(depth, dtype=np.int64)


def check_cc_labels(edges, n: int, labels) -> list:
    """Problems with a component labelling; empty when it is correct."""
    labels = np.asarray(labels)
    if labels.shape != (n,):
        return [f"label array has shape {labels.shape}, expected ({n},)"]
    expected = component_min_labels(edges, n)
    bad = np.flatnonzero(labels != expected)
    if len(bad):
        v = int(bad[0])
        return [f"{len(bad)} vertices mislabelled, e.g. C[{v}] = {labels[v]}, expected {expected[v]}"]
    return []


def check_bfs(adj, source: int, level, parent) -> list:
    """Compare levels with a FIFO BFS and validate the parent tree."""
    level = np.asarray(level)
    parent = np.asarray(parent)
    problems = []
    expected = fifo_bfs_levels(adj, source)
    bad = np.flatnonzero(level != expected)
    if len(bad):
        v = int(bad[0])
        problems.append(f"{len(bad)} levels differ, e.g. level[{v}] = {level[v]}, expected {expected[v]}")
    if parent[source] != source:
        problems.append(f"parent of source is {parent[source]}")
    for v in range(len(adj)):
        if v == source:
            continue
        if expected[v] == UNREACHED:
            if parent[v] != UNREACHED:
                problems.append(f"unreached vertex {v} has parent {parent[v]}")
            continue
        p = int(parent[v])
        if not 0 <= p < len(adj) or p not in adj[v] or expected[p] != expected[v] - 1:
            problems.append(f"vertex {v} at level {expected[v]} has bad parent {p}")
        if len(problems) > 20:
            break
    return problems
