"""Machine configuration, global addresses and hardware event counters."""

from __future__ import annotations

import dataclasses
import enum
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidAddress, InvalidArgument

WORD_BYTES = 8
MAX_WORD = np.iinfo(np.int64).max


@dataclass(frozen=True)
class MachineConfig:
    """Shape and cost model of the simulated machine.

    Costs are in simulated cycles.  A hardware context issues at most once
    every ``contexts_per_core`` cycles (round-robin over the core's context
    slots), so a thread operation costing ``c`` takes ``c * issue_period``
    cycles of wall time.  Migration latency is not scaled: the migration
    engine moves contexts without occupying issue slots.

    ``context_slots_per_node`` is the thread-context *memory*: threads
    beyond the hardware contexts wait there, threads beyond the slots cannot
    be created at all.
    """

    nodes: int = 8
    cores_per_node: int = 24
    contexts_per_core: int = 64
    msps_per_node: int = 8
    channel_bandwidth_bytes_per_sec: float = 2e9
    clock_hz: float = 225e6
    cost_local_access: float = 1.0
    cost_migration: float = 60.0
    cost_remote_op: float = 3.0
    word_bytes: int = WORD_BYTES
    context_slots_per_node: int = 16384
    memory_words_per_node: int = 64 * 2**30 // WORD_BYTES

    def __post_init__(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise InvalidArgument(f"{f.name} must be strictly positive, got {value!r}")
        if self.word_bytes != WORD_BYTES:
            raise InvalidArgument("word_bytes is fixed at 8")
        if self.context_slots_per_node < self.contexts_per_node():
            raise InvalidArgument("context_slots_per_node smaller than the hardware contexts")

    def contexts_per_node(self) -> int:
        return self.cores_per_node * self.contexts_per_core

    def total_contexts(self) -> int:
        return self.nodes * self.contexts_per_node()

    def issue_period(self) -> int:
        return self.contexts_per_core

    def channel_words_per_cycle(self) -> float:
        """Aggregate channel throughput of one node; one channel per MSP."""
        per_channel = self.channel_bandwidth_bytes_per_sec / self.clock_hz / self.word_bytes
        return per_channel * self.msps_per_node

    def default_job_contexts(self) -> int:
        return max(1, self.total_contexts() // 16)

    def replace(self, **changes) -> "MachineConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def default_pathfinder_config(nodes: int = 8) -> MachineConfig:
    if nodes < 1:
        raise InvalidArgument("a machine needs at least one node")
    return MachineConfig(nodes=nodes)


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(MachineConfig)}


def _coerce(key, text):
    if key not in _FIELD_TYPES:
        raise InvalidArgument(f"unknown machine key {key!r}")
    kind = _FIELD_TYPES[key]
    text = text.strip()
    try:
        if kind == "int":
            return int(float(text)) if "e" in text.lower() else int(text, 0)
        return float(text)
    except ValueError:
        raise InvalidArgument(f"bad value for {key}: {text!r}") from None


def parse_overrides(pairs) -> dict:
    """Turn ``["nodes=4", "cost_migration = 30"]`` into typed keyword args."""
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise InvalidArgument(f"expected key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        key = key.strip()
        out[key] = _coerce(key, value)
    return out


def load_config(path, overrides=()) -> MachineConfig:
    """Read a flat ``key = value`` file; ``#`` starts a comment."""
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    values = parse_overrides(lines)
    values.update(parse_overrides(overrides))
    return MachineConfig(**values)


def dump_config(cfg: MachineConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in cfg.to_dict().items())


def resolve_config(path=None, overrides=(), env=None) -> MachineConfig:
    """Defaults < file (explicit path, else ``PATHSIM_MACHINE``) < overrides."""
    env = os.environ if env is None else env
    path = path or env.get("PATHSIM_MACHINE")
    if path:
        return load_config(path, overrides)
    return MachineConfig(**parse_overrides(overrides))


class View(enum.IntEnum):
    REPLICATED = 0
    ABSOLUTE = 1
    STRIPED = 2


@dataclass(frozen=True)
class GlobalAddress:
    view: View
    array_id: int
    index: int


@dataclass(frozen=True)
class AllocInfo:
    view: View
    length: int
    node: int = 0  # owner, absolute view only


def home_node(addr: GlobalAddress, cfg: MachineConfig, alloc_table, current_node: int = 0) -> int:
    """Node owning ``addr``.

    Replicated addresses resolve to the querying context's node, so the
    caller passes ``current_node`` for them.
    """
    info = alloc_table.get(addr.array_id)
    if info is None:
        raise InvalidAddress(f"unknown allocation {addr.array_id}")
    if addr.view != info.view:
        raise InvalidAddress(f"allocation {addr.array_id} is {info.view.name}, not {View(addr.view).name}")
    if not 0 <= addr.index < info.length:
        raise InvalidAddress(f"index {addr.index} outside allocation of length {info.length}")
    if info.view == View.STRIPED:
        return addr.index % cfg.nodes
    if info.view == View.ABSOLUTE:
        return info.node
    if not 0 <= current_node < cfg.nodes:
        raise InvalidAddress(f"no node {current_node}")
    return current_node


def striped_counts(length: int, nodes: int) -> np.ndarray:
    """Elements of a striped array of ``length`` held by each node."""
    base, extra = divmod(length, nodes)
    return np.array([base + (n < extra) for n in range(nodes)], dtype=np.int64)


REMOTE_KINDS = ("min", "add", "write", "claim")


@dataclass
class CounterSet:
    """Per-node hardware event tallies.

    ``msp_ops`` is indexed ``[node, queue]``.  ``simulated_cycles`` is the
    work charged to each node (issue cycles, migration latency into the node
    and MSP occupancy), not the elapsed time of a run.
    """

    nodes: int
    msps: int
    migrations: np.ndarray = field(default=None)
    local_reads: np.ndarray = field(default=None)
    local_writes: np.ndarray = field(default=None)
    remote_min: np.ndarray = field(default=None)
    remote_add: np.ndarray = field(default=None)
    remote_write: np.ndarray = field(default=None)
    remote_claim: np.ndarray = field(default=None)
    spawns: np.ndarray = field(default=None)
    simulated_cycles: np.ndarray = field(default=None)
    msp_ops: np.ndarray = field(default=None)

    ARRAYS = (
        "migrations",
        "local_reads",
        "local_writes",
        "remote_min",
        "remote_add",
        "remote_write",
        "remote_claim",
        "spawns",
        "simulated_cycles",
    )

    def __post_init__(self):
        for name in self.ARRAYS:
            if getattr(self, name) is None:
                dtype = np.float64 if name == "simulated_cycles" else np.int64
                setattr(self, name, np.zeros(self.nodes, dtype=dtype))
        if self.msp_ops is None:
            self.msp_ops = np.zeros((self.nodes, self.msps), dtype=np.int64)

    @classmethod
    def for_config(cls, cfg: MachineConfig) -> "CounterSet":
        return cls(cfg.nodes, cfg.msps_per_node)

    @property
    def remote_ops(self) -> np.ndarray:
        return self.remote_min + self.remote_add + self.remote_write + self.remote_claim

    def remote_kind(self, kind: str) -> np.ndarray:
        return getattr(self, "remote_" + kind)

    def copy(self) -> "CounterSet":
        return CounterSet(
            self.nodes,
            self.msps,
            **{name: getattr(self, name).copy() for name in self.ARRAYS},
            msp_ops=self.msp_ops.copy(),
        )

    def _combine(self, other, op):
        if (self.nodes, self.msps) != (other.nodes, other.msps):
            raise InvalidArgument("counter sets from different machines")
        return CounterSet(
            self.nodes,
            self.msps,
            **{name: op(getattr(self, name), getattr(other, name)) for name in self.ARRAYS},
            msp_ops=op(self.msp_ops, other.msp_ops),
        )

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __add__(self, other):
        return self._combine(other, np.add)

    def add_(self, other: "CounterSet") -> None:
        for name in self.ARRAYS:
            getattr(self, name)[...] += getattr(other, name)
        self.msp_ops += other.msp_ops

    def totals(self) -> dict:
        out = {name: getattr(self, name).sum().item() for name in self.ARRAYS}
        out["remote_ops"] = int(self.remote_ops.sum())
        return out

    def __eq__(self, other):
        if not isinstance(other, CounterSet):
            return NotImplemented
        return (
            (self.nodes, self.msps) == (other.nodes, other.msps)
            and all(np.array_equal(getattr(self, n), getattr(other, n)) for n in self.ARRAYS)
            and np.array_equal(self.msp_ops, other.msp_ops)
        )

    def to_dict(self) -> dict:
        d = {name: getattr(self, name).tolist() for name in self.ARRAYS}
        d["msp_ops"] = self.msp_ops.tolist()
        d["totals"] = self.totals()
        return d
