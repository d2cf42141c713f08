"""Level-synchronous BFS and remote_min connected components.

Both kernels are vectorized over whole frontiers / vertex sets but follow a
concrete legal schedule of the logical threads, so every counter they charge
is exact for that schedule:

* edge work is done by threads spawned on the vertex's home node, one per
  chunk of ``grain`` edges; they read the local edge block and push results
  with MSP remote ops, so they never migrate;
* hooking reads every ``C[v]`` before any remote_min lands (reads first,
  MSP ops drain afterwards);
* compress threads chase the label forest as it stood when compress
  started; their intermediate writes land after all reads.

Cross-node control (frontier-empty test, changed-flag reduction) runs on a
per-job control thread through the per-thread memory API.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .graph import Graph, _ranges
from .machine import MAX_WORD, CounterSet, View
from .memsys import SimMemory
from .oracles import forest_depths
from .timing import Phase, chain_cycles, fanout_latency, make_phase, uniform_loop_phase

SENTINEL = MAX_WORD
DEFAULT_GRAIN = 64
DEFAULT_MAX_ITER = 64


class _Recorder:
    def __init__(self, mem: SimMemory):
        self.mem = mem
        self.start = mem.snapshot()
        self._last = self.start
        self.phases: list[Phase] = []

    def add(self, phase: Phase) -> Phase:
        now = self.mem.snapshot()
        phase.counters = now - self._last
        self._last = now
        self.phases.append(phase)
        return phase

    def total(self) -> CounterSet:
        return self._last - self.start


def _control_phase(mem, name, start_node, before: CounterSet) -> Phase:
    """Phase for a single control thread, built from its counter delta."""
    delta = mem.snapshot() - before
    ops = int(delta.local_reads.sum() + delta.local_writes.sum())
    chain = chain_cycles(mem.cfg, ops, int(delta.migrations.sum()))
    words = delta.local_reads + delta.local_writes
    return make_phase(mem.cfg, name, [start_node], [chain], words=words)


def _edge_threads(g: Graph, verts, grain, head_ops):
    """Split the edge blocks of ``verts`` into per-thread chunks."""
    deg = g.degrees()[verts]
    nch = np.maximum(1, -(-deg // grain))
    tv = np.repeat(verts, nch)
    first = np.repeat(np.cumsum(nch) - nch, nch)
    idx = np.arange(len(tv)) - first
    size = np.clip(np.repeat(deg, nch) - idx * grain, 0, grain)
    return tv, size, head_ops + 2 * size


def _edge_phase(mem, g, name, verts, targets, kind, target_h, grain, head_ops) -> Phase:
    """Charge one pass of edge-block threads that each push a remote op per edge."""
    cfg = mem.cfg
    N = cfg.nodes
    tv, size, ops = _edge_threads(g, verts, grain, head_ops)
    spawn = tv % N
    reads = np.bincount(spawn, weights=head_ops + size, minlength=N).astype(np.int64)
    sent = np.bincount(spawn, weights=size, minlength=N).astype(np.int64)
    mem.charge_spawns(np.bincount(spawn, minlength=N))
    mem.charge_reads(reads)
    mem.charge_issue(sent)
    grid = mem.charge_remote(kind, target_h, targets)
    words = reads + 2 * grid.sum(axis=1)  # remote ops read and write their word
    return make_phase(cfg, name, spawn, chain_cycles(cfg, ops), msp=grid, words=words, fixed=fanout_latency(cfg))


def _by_home(values, N):
    return np.bincount(np.asarray(values, dtype=np.int64) % N, minlength=N)


@dataclass
class BfsResult:
    source: int
    level: np.ndarray
    parent: np.ndarray
    levels_count: int
    phases: list = field(repr=False, default_factory=list)
    counters: CounterSet | None = field(repr=False, default=None)
    level_h: int | None = None
    parent_h: int | None = None

    def reached(self) -> np.ndarray:
        return self.level != SENTINEL


def bfs(g: Graph, source: int, mem: SimMemory | None = None, grain: int = DEFAULT_GRAIN, keep: bool = False) -> BfsResult:
    """Level-synchronous BFS with MSP claims on the parent array.

    Each frontier vertex's edge block is walked on its home node and every
    neighbour is claimed with a write-if-empty remote op; the first claim to
    serialize wins, and claims serialize in (vertex id, neighbour rank)
    order.  Each node then scans its own slice for freshly claimed vertices
    to form the next frontier.
    """
    mem = mem or g.mem
    cfg = mem.cfg
    N = cfg.nodes
    s = g.check_vertex(source)
    n = g.nvertices
    rec = _Recorder(mem)

    level_h = mem.alloc(View.STRIPED, n, SENTINEL)
    parent_h = mem.alloc(View.STRIPED, n, SENTINEL)
    flag_h = mem.alloc(View.REPLICATED, 1, 0)
    level, parent, flag = mem.array(level_h), mem.array(parent_h), mem.array(flag_h)
    local = mem.local_count(level_h)

    mem.charge_writes(2 * local)
    mem.charge_spawns(-(-local // grain))
    ctrl = mem.spawn_at(mem.addr(level_h, s))
    mem.write(ctrl, mem.addr(level_h, s), 0)
    mem.write(ctrl, mem.addr(parent_h, s), s)
    rec.add(uniform_loop_phase(cfg, "init", local, 2, grain))

    frontier = np.array([s], dtype=np.int64)
    depth = 0
    while True:
        pos = _graph_positions(g, frontier)
        targets = g.indices[pos]
        srcs = np.repeat(frontier, g.degrees()[frontier])
        open_ = parent[targets] == SENTINEL
        won, first = np.unique(targets[open_], return_index=True)
        parent[won] = srcs[open_][first]
        rec.add(_edge_phase(mem, g, "expand", frontier, targets, "claim", parent_h, grain, 2))

        fresh = np.flatnonzero((level == SENTINEL) & (parent != SENTINEL))
        level[fresh] = depth + 1
        found = _by_home(fresh, N)
        flag[:, 0] = found > 0
        mem.charge_reads(2 * local)
        mem.charge_writes(found + 1)
        mem.charge_spawns(-(-local // grain))
        ph = uniform_loop_phase(cfg, "scan", local, 2, grain)
        ph.words = ph.words + found + 1
        rec.add(ph)

        before, at = mem.snapshot(), ctrl.node
        more = mem.reduce_or_replicated(ctrl, flag_h)
        rec.add(_control_phase(mem, "reduce", at, before))
        if not more:
            break
        frontier = fresh
        depth += 1

    mem.terminate(ctrl)
    result = BfsResult(s, level.copy(), parent.copy(), depth + 1, rec.phases, rec.total())
    mem.free(flag_h)
    if keep:
        result.level_h, result.parent_h = level_h, parent_h
    else:
        mem.free(level_h)
        mem.free(parent_h)
    return result


def _graph_positions(g, verts):
    return _ranges(g.indptr, verts)


@dataclass
class CcResult:
    labels: np.ndarray
    iterations: int
    converged: bool
    phases: list = field(repr=False, default_factory=list)
    counters: CounterSet | None = field(repr=False, default=None)
    pre_compress: list = field(repr=False, default_factory=list)
    history: list = field(repr=False, default_factory=list)
    labels_h: int | None = None

    def ncomponents(self) -> int:
        return int(np.count_nonzero(self.labels == np.arange(len(self.labels))))


def connected_components(
    g: Graph,
    mem: SimMemory | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
    grain: int = DEFAULT_GRAIN,
    record: bool = False,
    keep: bool = False,
) -> CcResult:
    """Shiloach-Vishkin style components with remote_min hooking.

    Per iteration: snapshot ``pC = C``; clear the replicated ``changed`` flag
    on every node; push ``C[v]`` into ``C[j]`` with remote_min for every edge;
    each node flags local label changes; OR-reduce the flags across nodes and
    stop when nothing changed; otherwise pointer-jump every label to its root.

    With ``record`` the labels entering each compress (``pre_compress``) and
    after every hook/compress (``history``) are kept for inspection.
    """
    if max_iter < 1:
        raise InvalidArgument("max_iter must be >= 1")
    mem = mem or g.mem
    cfg = mem.cfg
    N = cfg.nodes
    n = g.nvertices
    rec = _Recorder(mem)
    vid = np.arange(n, dtype=np.int64)
    home = vid % N

    C_h = mem.alloc_from(View.STRIPED, vid)
    pC_h = mem.alloc(View.STRIPED, n, 0)
    changed_h = mem.alloc(View.REPLICATED, 1, 0)
    C, pC, changed = mem.array(C_h), mem.array(pC_h), mem.array(changed_h)
    local = mem.local_count(C_h)
    deg = g.degrees()
    has_edges = deg > 0
    starts = g.indptr[:-1][has_edges]

    mem.charge_writes(local)
    mem.charge_spawns(-(-local // grain))
    ctrl = mem.spawn_at(mem.addr(C_h, 0))
    rec.add(uniform_loop_phase(cfg, "init", local, 1, grain))

    pre, history = [], []
    converged = False
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        pC[:] = C
        mem.charge_reads(local)
        mem.charge_writes(local)
        mem.charge_spawns(-(-local // grain))
        rec.add(uniform_loop_phase(cfg, "snapshot", local, 2, grain))

        before, at = mem.snapshot(), ctrl.node
        mem.broadcast_replicated(ctrl, changed_h, 0)
        rec.add(_control_phase(mem, "clear", at, before))

        # every j receives C[v] from each v in Neig(j); symmetry of the
        # directed representation lets us reduce over j's own block
        if len(starts):
            pushed = np.minimum.reduceat(pC[g.indices], starts)
            C[has_edges] = np.minimum(C[has_edges], pushed)
        rec.add(_edge_phase(mem, g, "hook", vid, g.indices, "min", C_h, grain, 3))
        if record:
            history.append(C.copy())

        moved = _by_home(np.flatnonzero(pC != C), N)
        changed[:, 0] = moved > 0
        mem.charge_reads(2 * local)
        mem.charge_writes((moved > 0).astype(np.int64))
        mem.charge_spawns(-(-local // grain))
        rec.add(uniform_loop_phase(cfg, "detect", local, 2, grain))

        before, at = mem.snapshot(), ctrl.node
        any_changed = mem.reduce_or_replicated(ctrl, changed_h)
        rec.add(_control_phase(mem, "reduce", at, before))
        if not any_changed:
            converged = True
            break

        if record:
            pre.append(C.copy())
        rec.add(_compress(mem, g, C, C_h, home))
        if record:
            history.append(C.copy())

    mem.terminate(ctrl)
    result = CcResult(C.copy(), iterations, converged, rec.phases, rec.total(), pre, history)
    mem.free(pC_h)
    mem.free(changed_h)
    if keep:
        result.labels_h = C_h
    else:
        mem.free(C_h)
    return result


def _compress(mem, g, C, C_h, home) -> Phase:
    """Pointer-jump every label to its root; one thread per vertex."""
    cfg = mem.cfg
    N = cfg.nodes
    n = len(C)
    snap = C.copy()
    cur = snap.copy()  # thread-local copy of C[v]
    loc = home.copy()
    ops = np.ones(n, dtype=np.int64)
    migs = np.zeros(n, dtype=np.int64)
    read_at = [home]
    mig_to = []
    local_w = []
    remote_w = []
    remote_from = []
    active = np.arange(n, dtype=np.int64)
    while active.size:
        x = cur[active]
        dest = x % N
        hop = dest != loc[active]
        mig_to.append(dest[hop])
        migs[active[hop]] += 1
        loc[active] = dest
        read_at.append(dest)
        ops[active] += 1
        y = snap[x]
        go = y != x
        active = active[go]
        cur[active] = y[go]
        ops[active] += 1
        at_home = loc[active] == home[active]
        local_w.append(home[active][at_home])
        remote_w.append(active[~at_home])
        remote_from.append(loc[active][~at_home])
    C[:] = cur

    reads = np.bincount(np.concatenate(read_at), minlength=N)
    lw = np.bincount(np.concatenate(local_w), minlength=N)
    rw = np.concatenate(remote_w)
    mem.charge_spawns(np.bincount(home, minlength=N))
    mem.charge_reads(reads)
    mem.charge_writes(lw)
    mem.charge_migrations(np.concatenate(mig_to))
    mem.charge_issue(np.bincount(np.concatenate(remote_from), minlength=N))
    grid = mem.charge_remote("write", C_h, rw)
    words = reads + lw + grid.sum(axis=1)
    return make_phase(cfg, "compress", home, chain_cycles(cfg, ops, migs), msp=grid, words=words, fixed=fanout_latency(cfg))


@dataclass
class MigrationVerdict:
    ok: bool
    hook_migrations: list
    compress_migrations: list
    compress_depth_bounds: list


def cc_hooking_migration_check(result: CcResult) -> MigrationVerdict:
    """Check the migration structure of a CC run recorded with ``record=True``.

    Hooking threads start on the home of the vertex they own and only read
    that vertex's block, so every hook phase must show zero migrations.
    Compress phase ``i`` may migrate at most once per level of the label
    forest entering it, i.e. no more than the sum of its vertex depths.
    """
    hooks = [int(ph.counters.migrations.sum()) for ph in result.phases if ph.name == "hook"]
    compress = [int(ph.counters.migrations.sum()) for ph in result.phases if ph.name == "compress"]
    if len(compress) != len(result.pre_compress):
        raise InvalidArgument("run was not recorded with record=True")
    bounds = [int(forest_depths(labels).sum()) for labels in result.pre_compress]
    ok = all(m == 0 for m in hooks) and all(m <= b for m, b in zip(compress, bounds))
    return MigrationVerdict(ok, hooks, compress, bounds)
