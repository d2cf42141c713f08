"""Migratory-thread machine simulator and concurrent graph-query engine."""

from .algos import bfs, cc_hooking_migration_check, connected_components
from .errors import (
    AllocationFailure,
    ContextExhaustion,
    InvalidAddress,
    InvalidArgument,
    PathsimError,
    UseAfterTermination,
)
from .graph import Graph, build, degree, load_graph, neighbors
from .machine import CounterSet, GlobalAddress, MachineConfig, View, default_pathfinder_config, home_node
from .memsys import SimMemory, SimThread, run_interleaved
from .queries import (
    JobKind,
    QueryEngine,
    QueryJob,
    RunReport,
    improvement_percent,
    make_mix,
    quantile_summary,
    run_concurrent,
    run_sequential,
)
from .rmat import RmatParams, canonicalize, generate_edges

__version__ = "0.1.0"
