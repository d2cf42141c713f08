"""
An 80/20 mix of BFS and connected components
============================================

Mixed query sets, per-query completion quantiles, and the point where
concurrent submission runs out of thread contexts.
"""

import numpy as np

from pathsim import QueryEngine, SimMemory, build, default_pathfinder_config, improvement_percent, make_mix
from pathsim.errors import ContextExhaustion
from pathsim.rmat import RmatParams, canonicalize, generate_edges

p = RmatParams(12, seed=2)
g = build(canonicalize(generate_edges(p)), p.nvertices, SimMemory(default_pathfinder_config(8)))
engine = QueryEngine(g)
sources = np.flatnonzero(g.degrees())

for total in (10, 40, 170):
    jobs = make_mix(total, 0.8, 1, g.nvertices, sources)
    seq, conc = engine.run(jobs, "seq"), engine.run(jobs, "conc")
    q = ", ".join(f"{x * 1e3:.2f}" for x in conc.quantiles)
    print(f"{conc.kind_mix():>12}: seq {seq.makespan_s * 1e3:7.2f} ms, conc {conc.makespan_s * 1e3:7.2f} ms, "
          f"+{improvement_percent(seq.makespan_s, conc.makespan_s):.0f}%; per-query ms [{q}]")

print(f"\neach job reserves {engine.job_contexts} contexts; context memory holds {engine.capacity()}")
for total in (170, 171, 256):
    jobs = make_mix(total, 0.8, 1, g.nvertices, sources)
    try:
        engine.run(jobs, "conc")
        print(f"{total} concurrent jobs: ok")
    except ContextExhaustion as exc:
        print(f"{total} concurrent jobs: {exc}")
        print(f"{total} sequential jobs: {engine.run(jobs, 'seq').makespan_s * 1e3:.1f} ms")
