"""
Migrating reads versus memory-side operations
=============================================

A thread that reads remote memory moves to the data.  A thread that
updates remote memory with an MSP operation stays where it is.
"""

import numpy as np

from pathsim import SimMemory, View, default_pathfinder_config

mem = SimMemory(default_pathfinder_config(4))

# a striped array: element i lives on node i % 4
chain = mem.alloc_from(View.STRIPED, np.r_[np.arange(1, 16), -1])
print("elements per node:", mem.local_count(chain).tolist())

# follow the pointers 0 -> 1 -> ... -> 15; every hop lands on another node
t = mem.spawn_at(mem.addr(chain, 0))
i = 0
while i >= 0:
    i = mem.read(t, mem.addr(chain, i))
print("pointer chase of 16 elements, migrations:", mem.counters.totals()["migrations"])
print("thread ended on node", t.node)

# now push a minimum into every element without moving at all
before = mem.snapshot()
for k in range(16):
    mem.remote_min(t, mem.addr(chain, k), -k)
delta = mem.snapshot() - before
print("16 remote_min ops, migrations:", delta.totals()["migrations"])
print("remote_min per home node:", delta.remote_min.tolist())
print("values:", mem.array(chain).tolist())

# the replicated view gives each node a private copy of the same address
flag = mem.alloc(View.REPLICATED, 1, 0)
mem.write(t, mem.addr(flag, 0), 1)
print("replicated flag copies after a local write:", mem.array(flag)[:, 0].tolist())
before = mem.snapshot()
print("OR over all copies:", mem.reduce_or_replicated(t, flag),
      "visited with", (mem.snapshot() - before).totals()["migrations"], "migrations")
