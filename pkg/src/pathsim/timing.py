"""Phase traces and the round-based cost model that turns them into time.

A kernel run is a list of barrier-separated :class:`Phase` records.  Within
a phase each node is limited by three independent resources:

* thread contexts: threads execute their chains in parallel, at most
  ``budget`` per job and ``contexts_per_node`` in total (threads beyond that
  wait in context memory, so the node's context-time is shared fluidly);
* MSP queues: every remote op occupies its queue for ``cost_remote_op``;
* memory channels: every word moved costs channel bandwidth.

Concurrent jobs run in lockstep rounds: round ``r`` executes phase ``r`` of
every job that still has one.  A single job reduces to its standalone time,
and a round never costs more than running its phases one after another.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .machine import CounterSet, MachineConfig


@dataclass
class Phase:
    name: str
    threads: np.ndarray  # per spawn node
    work: np.ndarray  # total thread-chain cycles per spawn node
    longest: np.ndarray  # longest single chain per spawn node
    msp: np.ndarray  # remote ops per [node, queue]
    words: np.ndarray  # channel words moved per node
    fixed: float = 0.0  # serial latency outside the nodes (fan-out)
    counters: CounterSet | None = field(default=None, repr=False)


def chain_cycles(cfg: MachineConfig, ops, migrations=0):
    """Wall cycles of one thread issuing ``ops`` operations and migrating."""
    return np.asarray(ops) * (cfg.cost_local_access * cfg.issue_period()) + np.asarray(migrations) * cfg.cost_migration


def make_phase(cfg, name, spawn_nodes, chains, msp=None, words=None, fixed=0.0) -> Phase:
    """Aggregate per-thread chains (and their spawn nodes) into a phase."""
    n = cfg.nodes
    spawn_nodes = np.asarray(spawn_nodes, dtype=np.int64)
    chains = np.asarray(chains, dtype=np.float64)
    threads = np.bincount(spawn_nodes, minlength=n).astype(np.int64)
    work = np.bincount(spawn_nodes, weights=chains, minlength=n)
    longest = np.zeros(n)
    if len(chains):
        np.maximum.at(longest, spawn_nodes, chains)
    return Phase(
        name,
        threads,
        work,
        longest,
        np.zeros((n, cfg.msps_per_node), dtype=np.int64) if msp is None else np.asarray(msp),
        np.zeros(n) if words is None else np.asarray(words, dtype=np.float64),
        float(fixed),
    )


def uniform_loop_phase(cfg, name, per_node, ops_per_elem, grain, words_per_elem=None, fixed=None) -> Phase:
    """Per-node parallel loop split into chunks of ``grain`` local elements."""
    per_node = np.asarray(per_node, dtype=np.int64)
    full, rest = np.divmod(per_node, grain)
    nodes = np.arange(cfg.nodes)
    spawn = np.concatenate([np.repeat(nodes, full), nodes[rest > 0]])
    sizes = np.concatenate([np.full(int(full.sum()), grain), rest[rest > 0]])
    words = per_node * (ops_per_elem if words_per_elem is None else words_per_elem)
    if fixed is None:
        fixed = fanout_latency(cfg)
    return make_phase(cfg, name, spawn, chain_cycles(cfg, sizes * ops_per_elem), words=words, fixed=fixed)


def fanout_latency(cfg) -> float:
    """Spawning one worker per node from a single control thread."""
    return (cfg.nodes - 1) * cfg.cost_migration


def job_budget_per_node(cfg: MachineConfig, job_contexts: int) -> int:
    return max(1, int(job_contexts) // cfg.nodes)


def node_times(phases, budgets, cfg: MachineConfig) -> np.ndarray:
    """Per-node busy time of one round holding ``phases`` (one per job)."""
    n = cfg.nodes
    longest_d = np.zeros(n)
    context_time = np.zeros(n)
    msp = np.zeros((n, cfg.msps_per_node))
    words = np.zeros(n)
    for ph, b in zip(phases, budgets):
        active = np.minimum(ph.threads, b)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(active > 0, np.maximum(ph.longest, ph.work / np.maximum(active, 1)), 0.0)
        np.maximum(longest_d, d, out=longest_d)
        context_time += active * d
        msp += ph.msp
        words += ph.words
    latency = np.maximum(longest_d, context_time / cfg.contexts_per_node())
    msp_time = msp.max(axis=1) * cfg.cost_remote_op
    chan_time = words / cfg.channel_words_per_cycle()
    return np.maximum(latency, np.maximum(msp_time, chan_time))


def round_time(phases, budgets, cfg) -> tuple[float, np.ndarray]:
    per_node = node_times(phases, budgets, cfg)
    fixed = max((ph.fixed for ph in phases), default=0.0)
    return float(per_node.max()) + fixed, per_node


def standalone_time(trace, budget, cfg) -> float:
    return sum(round_time([ph], [budget], cfg)[0] for ph in trace)


@dataclass
class Schedule:
    starts: np.ndarray  # cycles
    ends: np.ndarray
    makespan: float
    node_busy: np.ndarray
    rounds: int


def schedule_sequential(traces, budgets, cfg) -> Schedule:
    starts, ends = [], []
    busy = np.zeros(cfg.nodes)
    clock = 0.0
    rounds = 0
    for trace, b in zip(traces, budgets):
        starts.append(clock)
        for ph in trace:
            dt, per_node = round_time([ph], [b], cfg)
            clock += dt
            busy += per_node
            rounds += 1
        ends.append(clock)
    return Schedule(np.array(starts), np.array(ends), clock, busy, rounds)


def schedule_concurrent(traces, budgets, cfg) -> Schedule:
    k = len(traces)
    ends = np.zeros(k)
    busy = np.zeros(cfg.nodes)
    clock = 0.0
    depth = max((len(t) for t in traces), default=0)
    for r in range(depth):
        live = [j for j in range(k) if r < len(traces[j])]
        dt, per_node = round_time([traces[j][r] for j in live], [budgets[j] for j in live], cfg)
        clock += dt
        busy += per_node
        for j in live:
            if r == len(traces[j]) - 1:
                ends[j] = clock
    return Schedule(np.zeros(k), ends, clock, busy, depth)
