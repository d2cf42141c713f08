"""
Connected components with remote_min hooking
============================================

Hooking pushes labels with MSP operations and never migrates.  The
compress step chases each label to its root, one hop per tree level.
"""

import math

import numpy as np

from pathsim import SimMemory, build, cc_hooking_migration_check, connected_components, default_pathfinder_config
from pathsim.oracles import check_cc_labels, forest_depths
from pathsim.rmat import RmatParams, canonicalize, generate_edges

p = RmatParams(scale=12, seed=3)
edges = canonicalize(generate_edges(p))
g = build(edges, p.nvertices, SimMemory(default_pathfinder_config(8)))
print(f"{g.nvertices} vertices, {len(edges)} undirected edges")

r = connected_components(g, record=True)
print(f"{r.ncomponents()} components after {r.iterations} rounds, converged={r.converged}")
print("union-find agrees:", check_cc_labels(edges, g.nvertices, r.labels) == [])

v = cc_hooking_migration_check(r)
print("migrations during hooking:", v.hook_migrations)
for k, (m, labels) in enumerate(zip(v.compress_migrations, r.pre_compress)):
    depth = forest_depths(labels)
    print(f"compress {k}: {m} migrations, forest depth sum {depth.sum()}, deepest {depth.max()}")

# rounds grow with the diameter: a path numbered away from vertex 0
# moves the minimum label one hop per round
for n in (16, 64, 256):
    order = [0] + list(range(n - 1, 0, -1))
    path = canonicalize(np.array(list(zip(order[:-1], order[1:]))))
    rp = connected_components(build(path, n, SimMemory(default_pathfinder_config(8))), max_iter=n + 1)
    print(f"path of {n}: {rp.iterations} rounds (log2 bound would be {math.ceil(math.log2(n)) + 2})")
