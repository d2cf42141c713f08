"""R-MAT edge generation, canonicalization and the binary edge-file format."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidArgument

BLOCK_EDGES = 1 << 16


@dataclass(frozen=True)
class RmatParams:
    scale: int
    edgefactor: int = 16
    a: float = 0.57
    b: float = 0.19
    c: float = 0.19
    d: float = 0.05
    seed: int = 0
    scramble: bool = True

    def __post_init__(self):
        if self.scale < 1 or self.edgefactor < 1:
            raise InvalidArgument("scale and edgefactor must be >= 1")
        if self.scale >= 62 or self.edgefactor * (1 << self.scale) >= 1 << 62:
            raise InvalidArgument(f"scale {self.scale} overflows 64-bit vertex indices")
        probs = (self.a, self.b, self.c, self.d)
        if any(not 0.0 <= q <= 1.0 for q in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise InvalidArgument(f"quadrant probabilities must lie in [0, 1] and sum to 1: {probs}")
        if not 0 <= self.seed < 1 << 64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")

    @property
    def nvertices(self) -> int:
        return 1 << self.scale

    @property
    def nedges(self) -> int:
        return self.edgefactor << self.scale


def _block(p: RmatParams, block: int, count: int) -> np.ndarray:
    # Philox is counter based: block k always sees the same stream, whatever
    # order or worker generates it.
    bitgen = np.random.Philox(key=p.seed, counter=[0, 0, block, 0])
    u = np.random.Generator(bitgen).random((p.scale, count))
    cuts = np.array([p.a, p.a + p.b, p.a + p.b + p.c])
    quadrant = np.searchsorted(cuts, u, side="right")
    row = (quadrant >= 2).astype(np.int64)
    col = (quadrant & 1).astype(np.int64)
    weights = (np.int64(1) << np.arange(p.scale, dtype=np.int64))[:, None]
    out = np.empty((count, 2), dtype=np.int64)
    out[:, 0] = (row * weights).sum(axis=0)
    out[:, 1] = (col * weights).sum(axis=0)
    return out


def vertex_permutation(p: RmatParams) -> np.ndarray:
    """Seeded relabelling of vertex ids, drawn from its own Philox stream."""
    bitgen = np.random.Philox(key=p.seed, counter=[0, 1, 0, 0])
    return np.random.Generator(bitgen).permutation(p.nvertices).astype(np.int64)


def generate_edges(p: RmatParams) -> np.ndarray:
    """Raw R-MAT tuples, shape ``(edgefactor * 2**scale, 2)``.

    Each edge descends ``scale`` levels of the adjacency matrix with one
    uniform draw per level selecting quadrant a, b, c or d.  With
    ``scramble`` the endpoints are then relabelled by a seeded permutation,
    as the Graph500 generator does; without it low ids are the hubs and a
    striped layout piles most of the edges onto node 0.
    """
    total = p.nedges
    nblocks = -(-total // BLOCK_EDGES)
    parts = [_block(p, k, min(BLOCK_EDGES, total - k * BLOCK_EDGES)) for k in range(nblocks)]
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    if p.scramble:
        edges = vertex_permutation(p)[edges]
    return edges


def canonicalize(edges) -> np.ndarray:
    """Undirected simple edge set: no self-loops, ``i < j``, sorted, unique."""
    e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if e.size and e.min() < 0:
        raise InvalidArgument("negative vertex id")
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    keep = lo != hi
    lo, hi = lo[keep], hi[keep]
    if len(lo) == 0:
        return np.empty((0, 2), dtype=np.int64)
    if hi.max() < 1 << 31:
        keys = np.unique((lo << 32) | hi)
        return np.stack([keys >> 32, keys & 0xFFFFFFFF], axis=1)
    return np.unique(np.stack([lo, hi], axis=1), axis=0)


def header_path(path) -> Path:
    return Path(str(path) + ".hdr")


def write_edges(path, edges, nvertices: int, params: RmatParams | None = None, canonical: bool = False) -> None:
    """Little-endian int64 pairs plus a ``key = value`` text sidecar."""
    e = np.ascontiguousarray(np.asarray(edges, dtype="<i8").reshape(-1, 2))
    Path(path).write_bytes(e.tobytes())
    meta = {"vertices": nvertices, "edges": len(e), "canonical": int(canonical)}
    if params is not None:
        meta.update(asdict(params))
    header_path(path).write_text("".join(f"{k} = {v}\n" for k, v in meta.items()))


def read_header(path) -> dict:
    meta = {}
    hp = header_path(path)
    if hp.exists():
        for line in hp.read_text().splitlines():
            if "=" in line:
                k, v = line.split("=", 1)
                meta[k.strip()] = v.strip()
    return meta


def read_edges(path) -> tuple[np.ndarray, int]:
    """Load an edge file; the vertex count comes from the sidecar when present."""
    raw = np.frombuffer(Path(path).read_bytes(), dtype="<i8")
    if raw.size % 2:
        raise InvalidArgument(f"{path}: truncated edge file")
    edges = raw.reshape(-1, 2).astype(np.int64)
    meta = read_header(path)
    if "vertices" in meta:
        n = int(meta["vertices"])
    else:
        n = int(edges.max()) + 1 if edges.size else 0
    if edges.size and edges.max() >= n:
        raise InvalidArgument(f"{path}: endpoint outside {n} vertices")
    return edges, n
