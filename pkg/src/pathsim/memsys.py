"""Simulated global memory with views, migrating reads and MSP remote ops.

Two access paths share one counter set:

* the per-thread API (``read``, ``write``, ``remote_min`` ...) moves a
  :class:`SimThread` around exactly as the hardware would and is safe to call
  from several host threads;
* the bulk ``charge_*`` helpers let vectorized kernels account for millions
  of operations at once without materializing thread objects.
"""

from __future__ import annotations

import itertools
import random
import threading
from dataclasses import dataclass

import numpy as np

from .errors import (
    AllocationFailure,
    ContextExhaustion,
    InvalidAddress,
    InvalidArgument,
    UseAfterTermination,
)
from .machine import (
    MAX_WORD,
    AllocInfo,
    CounterSet,
    GlobalAddress,
    MachineConfig,
    View,
    home_node,
    striped_counts,
)

_WRAP = 1 << 64
_HALF = 1 << 63


@dataclass
class SimThread:
    tid: int
    node: int
    query: object = None
    alive: bool = True


class SimMemory:
    def __init__(self, cfg: MachineConfig):
        self.cfg = cfg
        self.allocs: dict[int, AllocInfo] = {}
        self._data: dict[int, np.ndarray] = {}
        self._ids = itertools.count(1)
        self._tids = itertools.count()
        self.words_used = np.zeros(cfg.nodes, dtype=np.int64)
        self.occupancy = np.zeros(cfg.nodes, dtype=np.int64)
        self.counters = CounterSet.for_config(cfg)
        self._lock = threading.RLock()

    # -- allocation -------------------------------------------------------

    def _footprint(self, view, length, node):
        cfg = self.cfg
        if view == View.STRIPED:
            return striped_counts(length, cfg.nodes)
        per = np.zeros(cfg.nodes, dtype=np.int64)
        if view == View.ABSOLUTE:
            per[node] = length
        else:
            per[:] = length
        return per

    def alloc(self, view: View, length: int, init: int = 0, node: int = 0) -> int:
        view = View(view)
        if length < 1:
            raise InvalidArgument("allocation length must be >= 1")
        if view == View.ABSOLUTE and not 0 <= node < self.cfg.nodes:
            raise InvalidArgument(f"no node {node}")
        per = self._footprint(view, length, node)
        with self._lock:
            if np.any(self.words_used + per > self.cfg.memory_words_per_node):
                raise AllocationFailure(f"cannot place {length} words ({view.name})")
            handle = next(self._ids)
            self.words_used += per
            self.allocs[handle] = AllocInfo(view, length, node if view == View.ABSOLUTE else 0)
        shape = (self.cfg.nodes, length) if view == View.REPLICATED else (length,)
        self._data[handle] = np.full(shape, init, dtype=np.int64)
        return handle

    def alloc_from(self, view: View, values, node: int = 0) -> int:
        values = np.asarray(values, dtype=np.int64)
        handle = self.alloc(view, max(len(values), 1), 0, node)
        if len(values):
            self._data[handle][...] = values
        return handle

    def free(self, handle: int) -> None:
        with self._lock:
            info = self._info(handle)
            self.words_used -= self._footprint(info.view, info.length, info.node)
            del self.allocs[handle]
            del self._data[handle]

    def _info(self, handle) -> AllocInfo:
        try:
            return self.allocs[handle]
        except KeyError:
            raise InvalidAddress(f"unknown allocation {handle}") from None

    def addr(self, handle: int, index: int) -> GlobalAddress:
        return GlobalAddress(self._info(handle).view, handle, int(index))

    def array(self, handle: int) -> np.ndarray:
        """Backing storage, global element order (``[node, i]`` if replicated).

        Direct access bypasses accounting; kernels pair it with ``charge_*``.
        """
        self._info(handle)
        return self._data[handle]

    def local_count(self, handle: int) -> np.ndarray:
        info = self._info(handle)
        return self._footprint(info.view, info.length, info.node)

    def home(self, addr: GlobalAddress, current_node: int = 0) -> int:
        return home_node(addr, self.cfg, self.allocs, current_node)

    def msp_queue(self, addr: GlobalAddress) -> int:
        if addr.view == View.STRIPED:
            return (addr.index // self.cfg.nodes) % self.cfg.msps_per_node
        return addr.index % self.cfg.msps_per_node

    # -- threads ------------------------------------------------------------

    def spawn_at(self, addr: GlobalAddress, query=None, current_node: int = 0) -> SimThread:
        node = self.home(addr, current_node)
        with self._lock:
            if self.occupancy[node] >= self.cfg.context_slots_per_node:
                raise ContextExhaustion(
                    f"node {node} has no free thread context",
                    demanded=int(self.occupancy[node]) + 1,
                    capacity=self.cfg.context_slots_per_node,
                )
            self.occupancy[node] += 1
            self.counters.spawns[node] += 1
            return SimThread(next(self._tids), node, query)

    def terminate(self, t: SimThread) -> None:
        with self._lock:
            self._check(t)
            t.alive = False
            self.occupancy[t.node] -= 1

    def _check(self, t: SimThread):
        if not t.alive:
            raise UseAfterTermination(f"thread {t.tid} already terminated")

    def _migrate(self, t: SimThread, dest: int):
        c = self.counters
        self.occupancy[t.node] -= 1
        self.occupancy[dest] += 1
        c.migrations[dest] += 1
        c.simulated_cycles[dest] += self.cfg.cost_migration
        t.node = dest

    def _issue(self, node):
        self.counters.simulated_cycles[node] += self.cfg.cost_local_access

    def _cell(self, addr, node):
        data = self._data[addr.array_id]
        if addr.view == View.REPLICATED:
            return data[node], addr.index
        return data, addr.index

    def _msp(self, kind, addr, home):
        c = self.counters
        c.remote_kind(kind)[home] += 1
        c.msp_ops[home, self.msp_queue(addr)] += 1
        c.simulated_cycles[home] += self.cfg.cost_remote_op

    # -- per-thread operations ----------------------------------------------

    def read(self, t: SimThread, addr: GlobalAddress) -> int:
        with self._lock:
            self._check(t)
            home = self.home(addr, t.node)
            if home != t.node:
                self._migrate(t, home)
            self.counters.local_reads[t.node] += 1
            self._issue(t.node)
            arr, i = self._cell(addr, t.node)
            return int(arr[i])

    def write(self, t: SimThread, addr: GlobalAddress, value: int) -> None:
        with self._lock:
            self._check(t)
            home = self.home(addr, t.node)
            self._issue(t.node)
            if home == t.node:
                self.counters.local_writes[home] += 1
            else:
                self._msp("write", addr, home)
            arr, i = self._cell(addr, home)
            arr[i] = value

    def _rmw(self, kind, t, addr, fn):
        with self._lock:
            self._check(t)
            home = self.home(addr, t.node)
            self._issue(t.node)
            self._msp(kind, addr, home)
            arr, i = self._cell(addr, home)
            arr[i] = fn(int(arr[i]))

    def remote_min(self, t: SimThread, addr: GlobalAddress, value: int) -> None:
        self._rmw("min", t, addr, lambda old: min(old, value))

    def remote_add(self, t: SimThread, addr: GlobalAddress, value: int) -> None:
        # int64 wraparound like the hardware adder
        self._rmw("add", t, addr, lambda old: (old + value + _HALF) % _WRAP - _HALF)

    def remote_claim(self, t: SimThread, addr: GlobalAddress, value: int, empty: int = MAX_WORD) -> None:
        """Store ``value`` only if the cell still holds ``empty``; first claim wins."""
        self._rmw("claim", t, addr, lambda old: value if old == empty else old)

    def _node_order(self, start):
        n = self.cfg.nodes
        return [(start + k) % n for k in range(n)]

    def reduce_or_replicated(self, t: SimThread, handle: int, index: int = 0) -> bool:
        """OR of every node's copy, visiting nodes from the thread's own.

        Reaching a node's copy means going through its absolute address, so
        each hop is a migration; stops at the first true copy.
        """
        info = self._info(handle)
        if info.view != View.REPLICATED:
            raise InvalidArgument("reduce_or_replicated needs a replicated allocation")
        addr = self.addr(handle, index)
        with self._lock:
            self._check(t)
            for node in self._node_order(t.node):
                if node != t.node:
                    self._migrate(t, node)
                self.counters.local_reads[node] += 1
                self._issue(node)
                if self._data[handle][node, index]:
                    return True
            return False

    def broadcast_replicated(self, t: SimThread, handle: int, value: int, index: int = 0) -> None:
        """Write every node's copy by visiting the nodes in turn."""
        info = self._info(handle)
        if info.view != View.REPLICATED:
            raise InvalidArgument("broadcast_replicated needs a replicated allocation")
        self.addr(handle, index)
        with self._lock:
            self._check(t)
            for node in self._node_order(t.node):
                if node != t.node:
                    self._migrate(t, node)
                self.counters.local_writes[node] += 1
                self._issue(node)
                self._data[handle][node, index] = value

    # -- bulk accounting for vectorized kernels ------------------------------

    def _bins(self, nodes, weights=None):
        return np.bincount(np.asarray(nodes, dtype=np.int64), weights, minlength=self.cfg.nodes)

    def charge_reads(self, per_node) -> None:
        with self._lock:
            self.counters.local_reads += np.asarray(per_node, dtype=np.int64)
            self.counters.simulated_cycles += np.asarray(per_node) * self.cfg.cost_local_access

    def charge_writes(self, per_node) -> None:
        with self._lock:
            self.counters.local_writes += np.asarray(per_node, dtype=np.int64)
            self.counters.simulated_cycles += np.asarray(per_node) * self.cfg.cost_local_access

    def charge_issue(self, per_node) -> None:
        """Issue slots spent sending remote operations."""
        with self._lock:
            self.counters.simulated_cycles += np.asarray(per_node) * self.cfg.cost_local_access

    def charge_migrations(self, dest_nodes) -> None:
        per = self._bins(dest_nodes).astype(np.int64)
        with self._lock:
            self.counters.migrations += per
            self.counters.simulated_cycles += per * self.cfg.cost_migration

    def charge_spawns(self, per_node) -> None:
        with self._lock:
            self.counters.spawns += np.asarray(per_node, dtype=np.int64)

    def charge_remote(self, kind: str, handle: int, indices) -> np.ndarray:
        """Account MSP ops against elements of ``handle``; returns ops per [node, queue]."""
        info = self._info(handle)
        cfg = self.cfg
        indices = np.asarray(indices, dtype=np.int64)
        if info.view == View.STRIPED:
            homes = indices % cfg.nodes
            queues = (indices // cfg.nodes) % cfg.msps_per_node
        elif info.view == View.ABSOLUTE:
            homes = np.full(len(indices), info.node, dtype=np.int64)
            queues = indices % cfg.msps_per_node
        else:
            raise InvalidArgument("bulk remote ops on replicated data are not supported")
        grid = np.bincount(homes * cfg.msps_per_node + queues, minlength=cfg.nodes * cfg.msps_per_node)
        grid = grid.reshape(cfg.nodes, cfg.msps_per_node).astype(np.int64)
        per_node = grid.sum(axis=1)
        with self._lock:
            self.counters.remote_kind(kind)[...] += per_node
            self.counters.msp_ops += grid
            self.counters.simulated_cycles += per_node * cfg.cost_remote_op
        return grid

    def snapshot(self) -> CounterSet:
        with self._lock:
            return self.counters.copy()


def run_interleaved(bodies, seed) -> int:
    """Drive generator-based logical threads under a seeded random schedule.

    Every ``yield`` in a body is a preemption point.  The same seed always
    produces the same interleaving.  Returns the number of steps taken.
    """
    rng = random.Random(seed)
    live = list(bodies)
    steps = 0
    while live:
        i = rng.randrange(len(live))
        try:
            next(live[i])
            steps += 1
        except StopIteration:
            live[i] = live[-1]
            live.pop()
    return steps
