import threading
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathsim import SimMemory, View, default_pathfinder_config, run_interleaved
from pathsim.errors import AllocationFailure, ContextExhaustion, InvalidAddress, InvalidArgument, UseAfterTermination
from pathsim.machine import MAX_WORD


def mem_for(nodes=4, **kw):
    return SimMemory(default_pathfinder_config(nodes).replace(**kw))


def test_striped_alloc_examples():
    m = mem_for(8)
    h = m.alloc(View.STRIPED, 8, 0)
    assert m.local_count(h).tolist() == [1] * 8
    m = mem_for(4)
    h = m.alloc(View.STRIPED, 10, 7)
    assert m.local_count(h).tolist() == [3, 3, 2, 2]
    t = m.spawn_at(m.addr(h, 0))
    assert [m.read(t, m.addr(h, i)) for i in range(10)] == [7] * 10


def test_replicated_copies_independent():
    m = mem_for(4)
    h = m.alloc(View.REPLICATED, 1, 0)
    assert m.array(h).shape == (4, 1)
    t = m.spawn_at(m.addr(h, 0), current_node=2)
    assert t.node == 2
    m.write(t, m.addr(h, 0), 9)
    assert m.array(h)[:, 0].tolist() == [0, 0, 9, 0]
    assert m.read(t, m.addr(h, 0)) == 9
    assert m.counters.totals()["migrations"] == 0


def test_alloc_errors():
    m = mem_for(2, memory_words_per_node=10)
    with pytest.raises(InvalidArgument):
        m.alloc(View.STRIPED, 0)
    with pytest.raises(AllocationFailure):
        m.alloc(View.STRIPED, 21)
    h = m.alloc(View.STRIPED, 20)
    with pytest.raises(AllocationFailure):
        m.alloc(View.ABSOLUTE, 1, node=0)
    m.free(h)
    m.alloc(View.ABSOLUTE, 10, node=0)
    with pytest.raises(InvalidAddress):
        m.addr(h, 0)


def test_spawn_home_and_exhaustion():
    m = mem_for(8, context_slots_per_node=1536)
    h = m.alloc(View.STRIPED, 64)
    assert m.spawn_at(m.addr(h, 5)).node == 5
    threads = [m.spawn_at(m.addr(h, 0)) for _ in range(1536)]
    with pytest.raises(ContextExhaustion):
        m.spawn_at(m.addr(h, 8))
    m.terminate(threads[0])
    m.spawn_at(m.addr(h, 8))


def test_single_node_spawn():
    m = mem_for(1)
    h = m.alloc(View.STRIPED, 3)
    assert m.spawn_at(m.addr(h, 2)).node == 0


def test_use_after_termination():
    m = mem_for(2)
    h = m.alloc(View.STRIPED, 2)
    t = m.spawn_at(m.addr(h, 0))
    m.terminate(t)
    with pytest.raises(UseAfterTermination):
        m.read(t, m.addr(h, 1))
    with pytest.raises(UseAfterTermination):
        m.terminate(t)


def test_read_migrates_and_moves_occupancy():
    m = mem_for(4)
    h = m.alloc(View.STRIPED, 8)
    t = m.spawn_at(m.addr(h, 0))
    assert m.occupancy.tolist() == [1, 0, 0, 0]
    m.read(t, m.addr(h, 3))
    assert t.node == 3
    assert m.occupancy.tolist() == [0, 0, 0, 1]
    assert m.counters.migrations.tolist() == [0, 0, 0, 1]
    m.read(t, m.addr(h, 7))  # same node, no hop
    assert m.counters.totals()["migrations"] == 1


def test_write_and_remote_ops_never_migrate():
    m = mem_for(4)
    h = m.alloc(View.STRIPED, 8, 100)
    t = m.spawn_at(m.addr(h, 0))
    m.write(t, m.addr(h, 1), 50)
    m.remote_min(t, m.addr(h, 2), 3)
    m.remote_add(t, m.addr(h, 3), 4)
    m.write(t, m.addr(h, 4), 1)
    assert t.node == 0
    c = m.counters
    assert c.totals()["migrations"] == 0
    assert c.remote_write.tolist() == [0, 1, 0, 0]
    assert c.remote_min.tolist() == [0, 0, 1, 0]
    assert c.remote_add.tolist() == [0, 0, 0, 1]
    assert c.local_writes.tolist() == [1, 0, 0, 0]
    assert m.array(h)[:5].tolist() == [100, 50, 3, 104, 1]


def test_read_after_write():
    m = mem_for(3)
    h = m.alloc(View.STRIPED, 9)
    t = m.spawn_at(m.addr(h, 0))
    for i in range(9):
        m.write(t, m.addr(h, i), i * i)
        assert m.read(t, m.addr(h, i)) == i * i


def test_msp_queue_assignment():
    m = mem_for(2)
    h = m.alloc(View.STRIPED, 64)
    # element i: node i % 2, queue (i // 2) % 8
    assert m.msp_queue(m.addr(h, 0)) == 0
    assert m.msp_queue(m.addr(h, 3)) == 1
    assert m.msp_queue(m.addr(h, 17)) == 0
    t = m.spawn_at(m.addr(h, 0))
    for i in (1, 3, 17, 19):
        m.remote_add(t, m.addr(h, i), 1)
    assert m.counters.msp_ops[1].tolist() == [2, 2, 0, 0, 0, 0, 0, 0]


def test_remote_add_wraps():
    m = mem_for(1)
    h = m.alloc(View.STRIPED, 1, MAX_WORD)
    t = m.spawn_at(m.addr(h, 0))
    m.remote_add(t, m.addr(h, 0), 1)
    assert m.array(h)[0] == np.iinfo(np.int64).min


def test_claim_first_wins():
    m = mem_for(2)
    h = m.alloc(View.STRIPED, 2, MAX_WORD)
    t = m.spawn_at(m.addr(h, 0))
    m.remote_claim(t, m.addr(h, 1), 5)
    m.remote_claim(t, m.addr(h, 1), 6)
    assert m.array(h)[1] == 5
    assert m.counters.remote_claim.sum() == 2


def test_reduce_and_broadcast():
    m = mem_for(4)
    h = m.alloc(View.REPLICATED, 1, 0)
    t = m.spawn_at(m.addr(h, 0), current_node=1)
    assert m.reduce_or_replicated(t, h) is False
    assert m.counters.totals()["migrations"] == 3  # 1 -> 2 -> 3 -> 0
    assert t.node == 0
    m.array(h)[2, 0] = 1
    before = m.snapshot()
    assert m.reduce_or_replicated(t, h) is True  # 0 -> 1 -> 2, stops
    assert (m.snapshot() - before).totals()["migrations"] == 2
    m.broadcast_replicated(t, h, 7)
    assert m.array(h)[:, 0].tolist() == [7, 7, 7, 7]


def test_replicated_only_workload_has_no_migrations():
    m = mem_for(8)
    h = m.alloc(View.REPLICATED, 16, 1)
    threads = [m.spawn_at(m.addr(h, 0), current_node=n) for n in range(8)]
    for t in threads:
        for i in range(16):
            m.write(t, m.addr(h, i), m.read(t, m.addr(h, i)) + t.node)
    assert m.counters.totals()["migrations"] == 0
    assert m.array(h)[:, 0].tolist() == [1 + n for n in range(8)]


def test_pointer_chase_two_nodes():
    m = mem_for(2)
    L = 101
    h = m.alloc_from(View.STRIPED, np.r_[np.arange(1, L), -1])
    t = m.spawn_at(m.addr(h, 0))
    i = 0
    while i >= 0:
        i = m.read(t, m.addr(h, i))
    assert m.counters.totals()["migrations"] == L - 1


def _submit(m, h, kind, operands, start):
    t = m.spawn_at(m.addr(h, start % 4))
    op = m.remote_min if kind == "min" else m.remote_add
    for v in operands:
        yield
        op(t, m.addr(h, 0), int(v))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-2**40, 2**40), min_size=1, max_size=60), st.integers(0, 2**32), st.sampled_from(["min", "add"]))
def test_interleaved_remote_ops_fold(values, seed, kind):
    m = mem_for(4)
    init = 10**12
    h = m.alloc(View.STRIPED, 4, init)
    chunks = [values[k::5] for k in range(5)]
    run_interleaved([_submit(m, h, kind, c, k) for k, c in enumerate(chunks)], seed)
    fn = min if kind == "min" else (lambda a, b: a + b)
    assert m.array(h)[0] == reduce(fn, values, init)
    assert m.counters.remote_kind(kind).sum() == len(values)


def test_interleaving_is_seeded():
    def trace(seed):
        m = mem_for(4)
        h = m.alloc(View.STRIPED, 64)
        order = []

        def body(k):
            t = m.spawn_at(m.addr(h, k))
            for i in range(8):
                yield
                order.append(k)
                m.read(t, m.addr(h, (k * 8 + i * 3) % 64))

        run_interleaved([body(k) for k in range(6)], seed)
        return order, m.counters

    a, ca = trace(5)
    b, cb = trace(5)
    assert a == b and ca == cb
    assert trace(6)[0] != a


def test_real_threads_are_atomic():
    m = mem_for(4)
    h = m.alloc(View.STRIPED, 4, 0)
    hmin = m.alloc(View.STRIPED, 4, MAX_WORD)

    def worker(k):
        t = m.spawn_at(m.addr(h, k), current_node=k)
        for i in range(500):
            m.remote_add(t, m.addr(h, 1), 1)
            m.remote_min(t, m.addr(hmin, 2), k * 1000 + i)

    threads = [threading.Thread(target=worker, args=(k,)) for k in range(4)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert m.array(h)[1] == 2000
    assert m.array(hmin)[2] == 0
    assert m.counters.remote_add.sum() == 2000


def test_counters_monotone_during_run():
    m = mem_for(4)
    h = m.alloc(View.STRIPED, 32)
    t = m.spawn_at(m.addr(h, 0))
    prev = m.snapshot()
    rng = np.random.default_rng(1)
    for _ in range(200):
        i = int(rng.integers(32))
        op = int(rng.integers(4))
        if op == 0:
            m.read(t, m.addr(h, i))
        elif op == 1:
            m.write(t, m.addr(h, i), int(rng.integers(100)))
        elif op == 2:
            m.remote_min(t, m.addr(h, i), int(rng.integers(100)))
        else:
            m.remote_add(t, m.addr(h, i), int(rng.integers(100)))
        now = m.snapshot()
        for key, v in (now - prev).totals().items():
            assert v >= 0, key
        prev = now
