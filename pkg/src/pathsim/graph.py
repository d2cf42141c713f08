"""Loose-sparse-row graphs striped over simulated memory.

Vertex records (degree, edge-block offset) are striped, so vertex ``v``
lives on node ``v % nodes``; each node keeps one absolute-view array holding
the edge blocks of its own vertices back to back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .machine import View
from .memsys import SimMemory, SimThread


@dataclass
class Graph:
    nvertices: int
    nedges: int  # directed: twice the undirected count
    mem: SimMemory
    deg_h: int
    off_h: int
    edge_h: list
    # host-side CSR mirror of the same adjacency, used by vectorized kernels
    indptr: np.ndarray
    indices: np.ndarray

    @property
    def nodes(self) -> int:
        return self.mem.cfg.nodes

    def home(self, v):
        return np.asarray(v) % self.nodes

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def adjacency(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def check_vertex(self, v: int) -> int:
        if not 0 <= int(v) < self.nvertices:
            raise InvalidArgument(f"vertex {v} outside [0, {self.nvertices})")
        return int(v)


def _check_canonical(e: np.ndarray, n: int):
    if not len(e):
        return
    if e.min() < 0 or e.max() >= n:
        raise InvalidArgument(f"edge endpoint outside [0, {n})")
    if np.any(e[:, 0] >= e[:, 1]):
        raise InvalidArgument("edges must be canonical (i < j, no self-loops)")
    order = np.lexsort((e[:, 1], e[:, 0]))
    s = e[order]
    if np.any(np.all(s[1:] == s[:-1], axis=1)):
        raise InvalidArgument("duplicate edges")


def build(edges, nvertices: int, mem: SimMemory) -> Graph:
    """Store both directions of every canonical edge; blocks sorted ascending."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    n = int(nvertices)
    if n < 1:
        raise InvalidArgument("graph needs at least one vertex")
    _check_canonical(e, n)
    src = np.concatenate([e[:, 0], e[:, 1]])
    dst = np.concatenate([e[:, 1], e[:, 0]])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    deg = np.bincount(src, minlength=n).astype(np.int64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=indptr[1:])

    nodes = mem.cfg.nodes
    vid = np.arange(n, dtype=np.int64)
    home = vid % nodes
    # offset of each vertex's block inside its home node's edge array
    off = np.zeros(n, dtype=np.int64)
    edge_h = []
    for h in range(nodes):
        mine = vid[home == h]
        d = deg[mine]
        starts = np.concatenate([[0], np.cumsum(d)[:-1]]) if len(d) else d
        off[mine] = starts
        block = dst[_ranges(indptr, mine)]
        edge_h.append(mem.alloc_from(View.ABSOLUTE, block, node=h))

    deg_h = mem.alloc_from(View.STRIPED, deg)
    off_h = mem.alloc_from(View.STRIPED, off)
    return Graph(n, len(dst), mem, deg_h, off_h, edge_h, indptr, dst)


def _ranges(indptr, verts) -> np.ndarray:
    """Concatenated CSR positions of the given vertices, in order."""
    starts = indptr[verts]
    lens = indptr[verts + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=np.int64)
    rep = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
    return rep + np.arange(total, dtype=np.int64)


def neighbors(t: SimThread, g: Graph, v: int):
    """Iterate ``Neig(v)`` through simulated memory.

    The first record read migrates ``t`` to ``v``'s home; the edge block is
    on that node, so the rest of the iteration is local.
    """
    v = g.check_vertex(v)
    return _walk(t, g, v)


def _walk(t, g, v):
    mem = g.mem
    deg = mem.read(t, mem.addr(g.deg_h, v))
    off = mem.read(t, mem.addr(g.off_h, v))
    block = g.edge_h[v % g.nodes]
    for k in range(deg):
        yield mem.read(t, mem.addr(block, off + k))


def degree(t: SimThread, g: Graph, v: int) -> int:
    v = g.check_vertex(v)
    return g.mem.read(t, g.mem.addr(g.deg_h, v))


def load_graph(path, mem: SimMemory) -> Graph:
    """Read an edge file (raw or canonical) and build it into ``mem``."""
    from .rmat import canonicalize, read_edges

    edges, n = read_edges(path)
    return build(canonicalize(edges), n, mem)
