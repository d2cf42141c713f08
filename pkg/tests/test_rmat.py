import numpy as np
import pytest
from hypothesis import given, strategies as st

from pathsim.errors import InvalidArgument
from pathsim.rmat import (
    RmatParams,
    canonicalize,
    generate_edges,
    read_edges,
    read_header,
    vertex_permutation,
    write_edges,
)


def hash_set_canonical(edges):
    seen = set()
    for i, j in edges.tolist():
        if i != j:
            seen.add((min(i, j), max(i, j)))
    return sorted(seen)


def test_tuple_counts():
    assert RmatParams(25).nedges == 536_870_912
    assert len(generate_edges(RmatParams(10))) == 16_384
    e = generate_edges(RmatParams(1, edgefactor=1))
    assert e.shape == (2, 2) and set(e.ravel()) <= {0, 1}


def test_endpoints_in_range():
    e = generate_edges(RmatParams(12, seed=4))
    assert e.min() >= 0 and e.max() < 4096


def test_deterministic_and_seed_sensitive():
    p = RmatParams(9, seed=77)
    assert generate_edges(p).tobytes() == generate_edges(p).tobytes()
    assert generate_edges(RmatParams(9, seed=78)).tobytes() != generate_edges(p).tobytes()


def test_block_boundaries_do_not_repeat():
    # scale 13 with edgefactor 16 spans two generation blocks
    e = generate_edges(RmatParams(13, seed=2, scramble=False))
    assert not np.array_equal(e[:100], e[65536:65636])


def test_skew_without_scramble():
    e = generate_edges(RmatParams(12, seed=1, scramble=False))
    deg = np.bincount(e.ravel(), minlength=4096)
    # quadrant a dominates, so vertex 0 is the heaviest hub
    assert deg.argmax() == 0
    # the scramble is a relabelling of the same multigraph
    p = RmatParams(12, seed=1)
    perm = vertex_permutation(p)
    assert np.array_equal(perm[e], generate_edges(p))
    assert np.array_equal(np.sort(perm), np.arange(4096))


@pytest.mark.parametrize("kw", [dict(scale=0), dict(scale=3, edgefactor=0), dict(scale=62),
                                dict(scale=3, a=0.5), dict(scale=3, a=-0.1, b=0.86), dict(scale=3, seed=-1)])
def test_invalid_params(kw):
    with pytest.raises(InvalidArgument):
        RmatParams(**kw)


def test_canonicalize_examples():
    assert canonicalize([(1, 2), (2, 1), (1, 2), (3, 3)]).tolist() == [[1, 2]]
    assert canonicalize([]).shape == (0, 2)
    with pytest.raises(InvalidArgument):
        canonicalize([(-1, 2)])


@pytest.mark.parametrize("scale,seed", [(6, 0), (10, 3), (12, 9)])
def test_canonicalize_matches_hash_set(scale, seed):
    raw = generate_edges(RmatParams(scale, seed=seed))
    canon = canonicalize(raw)
    assert [tuple(x) for x in canon.tolist()] == hash_set_canonical(raw)
    n = 1 << scale
    assert len(canon) <= min(16 * n, n * (n - 1) // 2)


def test_canonicalize_wide_ids():
    big = 1 << 40
    e = np.array([[big + 1, 3], [3, big + 1], [big, big]])
    assert canonicalize(e).tolist() == [[3, big + 1]]


@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), max_size=200))
def test_canonicalize_properties(pairs):
    e = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    c = canonicalize(e)
    assert np.all(c[:, 0] < c[:, 1])
    assert np.array_equal(canonicalize(c), c)
    assert [tuple(x) for x in c.tolist()] == hash_set_canonical(e)


def test_edge_file_roundtrip(tmp_path):
    p = RmatParams(8, seed=5)
    e = generate_edges(p)
    path = tmp_path / "g.bin"
    write_edges(path, e, p.nvertices, p)
    assert path.stat().st_size == len(e) * 16
    back, n = read_edges(path)
    assert n == 256 and np.array_equal(back, e)
    meta = read_header(path)
    assert meta["seed"] == "5" and meta["edges"] == str(len(e)) and meta["canonical"] == "0"
    # without a sidecar the vertex count is inferred
    (tmp_path / "g.bin.hdr").unlink()
    assert read_edges(path)[1] == int(e.max()) + 1


def test_edge_file_errors(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"\0" * 24)
    with pytest.raises(InvalidArgument):
        read_edges(path)
    write_edges(path, [[0, 9]], 4)
    with pytest.raises(InvalidArgument):
        read_edges(path)
