"""Run BFS / CC query sets one after another or concurrently.

Jobs never share mutable state (each owns its result arrays and the graph
is read-only), so their operation counts do not depend on what else runs.
The engine therefore executes every job's kernel once to obtain its phase
trace and counter delta, and the cost model in :mod:`pathsim.timing`
decides how long the set takes sequentially or overlapped.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import algos
from .errors import ContextExhaustion, InvalidArgument
from .graph import Graph
from .machine import CounterSet
from .memsys import SimMemory
from .timing import job_budget_per_node, schedule_concurrent, schedule_sequential


class JobKind(str, enum.Enum):
    BFS = "bfs"
    CC = "cc"


@dataclass(frozen=True)
class QueryJob:
    job_id: int
    kind: JobKind
    source: int | None = None
    contexts_requested: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", JobKind(self.kind))
        if self.kind == JobKind.BFS and (self.source is None or self.source < 0):
            raise InvalidArgument("BFS job needs a source vertex")


@dataclass
class JobRecord:
    job_id: int
    kind: str
    source: int | None
    contexts: int
    start_cycles: float
    end_cycles: float
    time_s: float
    counters: CounterSet = field(repr=False)
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "source": self.source,
            "contexts": self.contexts,
            "start_cycles": self.start_cycles,
            "end_cycles": self.end_cycles,
            "time_s": self.time_s,
            "detail": self.detail,
            "counters": self.counters.totals(),
        }


@dataclass
class RunReport:
    mode: str
    jobs: list
    makespan_cycles: float
    makespan_s: float
    counters: CounterSet = field(repr=False)
    quantiles: tuple
    node_busy_cycles: np.ndarray = field(repr=False)
    rounds: int = 0
    wallclock_s: float | None = None

    @property
    def njobs(self) -> int:
        return len(self.jobs)

    def kind_mix(self) -> str:
        nb = sum(j.kind == JobKind.BFS.value for j in self.jobs)
        return f"bfs{nb}/cc{len(self.jobs) - nb}"

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "njobs": self.njobs,
            "kind_mix": self.kind_mix(),
            "makespan_cycles": self.makespan_cycles,
            "makespan_s": self.makespan_s,
            "quantiles_s": list(self.quantiles),
            "rounds": self.rounds,
            "wallclock_s": self.wallclock_s,
            "node_busy_cycles": self.node_busy_cycles.tolist(),
            "counters": self.counters.to_dict(),
            "jobs": [j.to_dict() for j in self.jobs],
        }


class QueryEngine:
    """Executes jobs against one graph; caches kernel traces by job content.

    A cached trace is reused only for an identical (kind, source) job on the
    same graph and machine, which the kernels make deterministic; counters
    are still accumulated into the memory system on every reuse.
    """

    def __init__(self, g: Graph, mem: SimMemory | None = None, job_contexts: int | None = None,
                 grain: int = algos.DEFAULT_GRAIN, max_iter: int = algos.DEFAULT_MAX_ITER, cache: bool = True):
        self.g = g
        self.mem = mem or g.mem
        self.cfg = self.mem.cfg
        self.job_contexts = job_contexts or self.cfg.default_job_contexts()
        self.grain = grain
        self.max_iter = max_iter
        self._cache = {} if cache else None

    def contexts_for(self, job: QueryJob) -> int:
        return job.contexts_requested or self.job_contexts

    def capacity(self) -> int:
        return self.cfg.nodes * self.cfg.context_slots_per_node

    def _execute(self, job: QueryJob):
        key = (job.kind, job.source)
        if self._cache is not None and key in self._cache:
            phases, delta, detail = self._cache[key]
            self.mem.counters.add_(delta)
            return phases, delta, detail
        if job.kind == JobKind.BFS:
            r = algos.bfs(self.g, job.source, self.mem, grain=self.grain)
            detail = {"levels": r.levels_count, "reached": int(r.reached().sum())}
        else:
            r = algos.connected_components(self.g, self.mem, max_iter=self.max_iter, grain=self.grain)
            detail = {"iterations": r.iterations, "converged": r.converged, "components": r.ncomponents()}
        out = (r.phases, r.counters, detail)
        if self._cache is not None:
            self._cache[key] = out
        return out

    def _admit(self, jobs, concurrent: bool):
        if not jobs:
            raise InvalidArgument("job set is empty")
        demands = [self.contexts_for(j) for j in jobs]
        cap = self.capacity()
        if concurrent:
            total = sum(demands)
            if total > cap:
                raise ContextExhaustion(
                    f"{len(jobs)} concurrent jobs need {total} thread contexts, "
                    f"context memory holds {cap}",
                    njobs=len(jobs), demanded=total, capacity=cap,
                )
        else:
            worst = max(demands)
            if worst > cap:
                raise ContextExhaustion(f"one job needs {worst} contexts, capacity {cap}",
                                        njobs=1, demanded=worst, capacity=cap)
        return demands

    def run(self, jobs, mode: str, wallclock: bool = False) -> RunReport:
        if mode not in ("seq", "conc"):
            raise InvalidArgument(f"unknown mode {mode!r}")
        jobs = list(jobs)
        demands = self._admit(jobs, mode == "conc")
        t0 = time.perf_counter()
        before = self.mem.snapshot()
        runs = [self._execute(j) for j in jobs]
        counters = self.mem.snapshot() - before
        budgets = [job_budget_per_node(self.cfg, d) for d in demands]
        traces = [r[0] for r in runs]
        sched = (schedule_concurrent if mode == "conc" else schedule_sequential)(traces, budgets, self.cfg)
        hz = self.cfg.clock_hz
        records = [
            JobRecord(j.job_id, j.kind.value, j.source, d, float(s), float(e), float(e - s) / hz, delta, detail)
            for j, d, s, e, (_, delta, detail) in zip(jobs, demands, sched.starts, sched.ends, runs)
        ]
        return RunReport(
            mode,
            records,
            sched.makespan,
            sched.makespan / hz,
            counters,
            quantile_summary([r.time_s for r in records]),
            sched.node_busy,
            sched.rounds,
            time.perf_counter() - t0 if wallclock else None,
        )


def run_sequential(jobs, g: Graph, mem: SimMemory | None = None, **kw) -> RunReport:
    return QueryEngine(g, mem, **kw).run(jobs, "seq")


def run_concurrent(jobs, g: Graph, mem: SimMemory | None = None, **kw) -> RunReport:
    return QueryEngine(g, mem, **kw).run(jobs, "conc")


def improvement_percent(seq_time: float, conc_time: float) -> float:
    """How much faster the concurrent run is, as a percentage of its own time."""
    if seq_time <= 0 or conc_time <= 0:
        raise InvalidArgument("times must be positive")
    return 100.0 * (seq_time - conc_time) / conc_time


def make_mix(total: int, bfs_fraction: float, seed: int, nvertices: int, candidates=None) -> list:
    """``round(total * bfs_fraction)`` BFS jobs from distinct sources, then CC jobs.

    Sources are a prefix of a seeded permutation of ``candidates`` (all
    vertices by default), so a larger ``total`` extends a smaller one.
    """
    if not 0.0 <= bfs_fraction <= 1.0:
        raise InvalidArgument("bfs_fraction must lie in [0, 1]")
    if total < 0:
        raise InvalidArgument("total must be >= 0")
    nbfs = math.floor(total * bfs_fraction + 0.5)
    pool = np.arange(nvertices, dtype=np.int64) if candidates is None else np.asarray(candidates, dtype=np.int64)
    if nbfs > len(pool):
        raise InvalidArgument(f"{nbfs} unique sources requested from {len(pool)} candidates")
    sources = np.random.default_rng(seed).permutation(pool)[:nbfs]
    jobs = [QueryJob(i, JobKind.BFS, int(s)) for i, s in enumerate(sources)]
    jobs += [QueryJob(nbfs + i, JobKind.CC) for i in range(total - nbfs)]
    return jobs


def quantile_summary(samples) -> tuple:
    """Min, quartiles and max with linear interpolation between order statistics.

    For sorted ``x`` of length ``n`` the ``q`` quantile sits at position
    ``q * (n - 1)``; fractional positions interpolate linearly.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.size == 0:
        raise InvalidArgument("quantiles of an empty sample")
    return tuple(float(v) for v in np.quantile(x, [0.0, 0.25, 0.5, 0.75, 1.0], method="linear"))


CSV_COLUMNS = ("mode", "njobs", "kind_mix", "makespan_s", "improvement_pct",
               "q0", "q25", "q50", "q75", "q100", "migrations", "remote_ops")


def csv_rows(seq: RunReport | None, conc: RunReport | None) -> list:
    rows = []
    gain = improvement_percent(seq.makespan_s, conc.makespan_s) if seq and conc else None
    for rep in (seq, conc):
        if rep is None:
            continue
        t = rep.counters.totals()
        rows.append({
            "mode": rep.mode,
            "njobs": rep.njobs,
            "kind_mix": rep.kind_mix(),
            "makespan_s": f"{rep.makespan_s:.9g}",
            "improvement_pct": f"{gain:.6g}" if gain is not None and rep.mode == "conc" else "",
            **{f"q{q}": f"{v:.9g}" for q, v in zip((0, 25, 50, 75, 100), rep.quantiles)},
            "migrations": t["migrations"],
            "remote_ops": t["remote_ops"],
        })
    return rows


def format_csv(rows, header_comment: str | None = None) -> str:
    buf = io.StringIO()
    if header_comment:
        buf.write(f"# {header_comment}\n")
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def format_json(header: dict, reports) -> str:
    return json.dumps({"header": header, "runs": [r.to_dict() for r in reports]}, indent=2)
