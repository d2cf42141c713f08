"""
Concurrent versus back-to-back BFS queries
==========================================

Independent searches overlap well: one BFS cannot keep every thread
context and MSP queue busy, so running many at once fills the gaps.
Pass a scale on the command line (default 14).
"""

import sys

import numpy as np

from pathsim import QueryEngine, SimMemory, build, default_pathfinder_config, improvement_percent, make_mix
from pathsim.rmat import RmatParams, canonicalize, generate_edges

scale = int(sys.argv[1]) if len(sys.argv) > 1 else 14

for scramble in (True, False):
    p = RmatParams(scale, seed=1, scramble=scramble)
    g = build(canonicalize(generate_edges(p)), p.nvertices, SimMemory(default_pathfinder_config(8)))
    share = np.bincount(np.arange(g.nvertices) % 8, weights=g.degrees(), minlength=8) / g.nedges
    print(f"\nscale {scale}, scrambled ids={scramble}; busiest node holds {share.max():.0%} of the edges")
    engine = QueryEngine(g)
    jobs = make_mix(64, 1.0, 6, g.nvertices, np.flatnonzero(g.degrees()))
    counts = list(range(16, 65, 8))
    conc = []
    print(" jobs   seq_ms  conc_ms  improvement")
    for k in counts:
        s, c = engine.run(jobs[:k], "seq"), engine.run(jobs[:k], "conc")
        conc.append(c.makespan_s)
        print(f"{k:5d} {s.makespan_s * 1e3:8.2f} {c.makespan_s * 1e3:8.2f} {improvement_percent(s.makespan_s, c.makespan_s):10.1f}%")
    fit = np.polyfit(counts, conc, 1)
    resid = np.asarray(conc) - np.polyval(fit, counts)
    r2 = 1 - resid @ resid / np.sum((conc - np.mean(conc)) ** 2)
    print(f"concurrent makespan ~ {fit[0] * 1e3:.3f} ms per job, R^2 = {r2:.5f}")
