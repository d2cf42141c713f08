"""Shared fixtures: small machines, graph helpers and the random-graph corpus."""

from __future__ import annotations

import numpy as np
import pytest

from pathsim import SimMemory, build, default_pathfinder_config
from pathsim.rmat import RmatParams, canonicalize, generate_edges

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def make_graph(edges, n, nodes=8, cfg=None):
    cfg = cfg or default_pathfinder_config(nodes)
    mem = SimMemory(cfg)
    return build(canonicalize(np.asarray(edges, dtype=np.int64).reshape(-1, 2)), n, mem)


def rmat_graph(scale, seed=0, nodes=8, edgefactor=16):
    p = RmatParams(scale, edgefactor=edgefactor, seed=seed)
    edges = canonicalize(generate_edges(p))
    return make_graph(edges, p.nvertices, nodes), edges


def random_corpus(count=56, seed=2024):
    """(edges, n) pairs: sparse and dense G(n, m), forests, paths, stars, empties."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        n = int(rng.integers(1, 4097)) if k % 4 else int(rng.integers(1, 65))
        shape = k % 7
        if shape == 0 or n < 2:
            e = np.empty((0, 2), dtype=np.int64)
        elif shape == 1:  # below the giant-component threshold
            m = int(rng.integers(0, n // 2 + 1))
            e = rng.integers(0, n, size=(m, 2))
        elif shape == 2:  # around the threshold
            e = rng.integers(0, n, size=(n, 2))
        elif shape == 3:  # dense-ish
            e = rng.integers(0, n, size=(min(8 * n, 30000), 2))
        elif shape == 4:  # random forest
            parent = np.array([rng.integers(0, v) if v and rng.random() < 0.9 else v for v in range(n)])
            perm = rng.permutation(n)
            keep = parent != np.arange(n)
            e = np.stack([perm[np.arange(n)[keep]], perm[parent[keep]]], axis=1)
        elif shape == 5:  # a few randomly labelled paths
            perm = rng.permutation(n)
            cuts = np.sort(rng.choice(np.arange(1, n), size=min(3, n - 1), replace=False))
            e = np.stack([perm[:-1], perm[1:]], axis=1)
            e = np.delete(e, cuts - 1, axis=0)
        else:  # stars around random hubs
            hubs = rng.choice(n, size=min(4, n), replace=False)
            e = np.stack([hubs[rng.integers(0, len(hubs), size=n)], np.arange(n)], axis=1)
        out.append((canonicalize(e), n))
    return out


@pytest.fixture(scope="session")
def corpus():
    return random_corpus()


@pytest.fixture(scope="session")
def rmat10():
    return rmat_graph(10, seed=11)
