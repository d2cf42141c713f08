import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pathsim import default_pathfinder_config
from pathsim.timing import (
    chain_cycles,
    fanout_latency,
    job_budget_per_node,
    make_phase,
    round_time,
    schedule_concurrent,
    schedule_sequential,
    standalone_time,
    uniform_loop_phase,
)

CFG = default_pathfinder_config(2)


def test_chain_cycles_barrel_issue():
    # one issue slot every 64 cycles, migrations are pure latency
    assert chain_cycles(CFG, 10) == 640
    assert chain_cycles(CFG, 10, 1) == 700


def test_budget_and_fanout():
    cfg8 = default_pathfinder_config(8)
    assert job_budget_per_node(cfg8, cfg8.default_job_contexts()) == 96
    assert job_budget_per_node(cfg8, 3) == 1
    assert fanout_latency(cfg8) == 7 * 60


def test_single_chain_latency():
    ph = make_phase(CFG, "a", [0], [700])
    t, per_node = round_time([ph], [96], CFG)
    assert t == 700 and per_node.tolist() == [700, 0]


def test_budget_limits_parallelism():
    # 3000 chains of 64 cycles on node 0, 96 at a time: 3000 * 64 / 96 = 2000
    ph = make_phase(CFG, "w", np.zeros(3000, dtype=int), np.full(3000, 64.0))
    assert round_time([ph], [96], CFG)[0] == 2000
    # two jobs fit side by side in 1536 contexts
    assert round_time([ph, ph], [96, 96], CFG)[0] == 2000
    # seventeen jobs need 17 * 96 * 2000 / 1536 = 2125
    assert round_time([ph] * 17, [96] * 17, CFG)[0] == pytest.approx(2125)


def test_msp_and_channel_limits():
    msp = np.zeros((2, 8), dtype=int)
    msp[0, 0] = 100
    ph = make_phase(CFG, "m", [0], [64], msp=msp)
    assert round_time([ph], [96], CFG)[0] == 300
    # 2e9 B/s over 8 channels at 225 MHz moves 2e9 / 225e6 words per cycle
    ph = make_phase(CFG, "c", [1], [64], words=[0, 1000])
    assert round_time([ph], [96], CFG)[0] == pytest.approx(112.5)
    # queues serialize separately: 100 ops on each of two queues still take 300
    msp[0, 1] = 100
    assert round_time([make_phase(CFG, "m", [0], [64], msp=msp)], [96], CFG)[0] == 300


def test_fixed_latency_takes_max():
    a = make_phase(CFG, "a", [0], [64], fixed=60)
    b = make_phase(CFG, "b", [0], [64], fixed=120)
    assert round_time([a, b], [96, 96], CFG)[0] == 64 + 120


def test_uniform_loop_phase_chunks():
    ph = uniform_loop_phase(CFG, "init", [130, 0], 2, 64, fixed=0)
    assert ph.threads.tolist() == [3, 0]
    assert ph.work.tolist() == [130 * 2 * 64, 0]
    assert ph.longest.tolist() == [64 * 2 * 64, 0]
    assert ph.words.tolist() == [260, 0]


def _phase(rng):
    n = int(rng.integers(1, 200))
    spawn = rng.integers(0, 2, size=n)
    msp = rng.integers(0, 300, size=(2, 8))
    return make_phase(CFG, "p", spawn, rng.integers(64, 5000, size=n).astype(float), msp=msp,
                      words=rng.integers(0, 4000, size=2), fixed=float(rng.integers(0, 100)))


def _traces(seed, k):
    rng = np.random.default_rng(seed)
    return [[_phase(rng) for _ in range(int(rng.integers(1, 6)))] for _ in range(k)]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 8), st.integers(1, 200))
def test_schedule_properties(seed, k, budget):
    traces = _traces(seed, k)
    budgets = [budget] * k
    seq = schedule_sequential(traces, budgets, CFG)
    conc = schedule_concurrent(traces, budgets, CFG)
    alone = [standalone_time(t, budget, CFG) for t in traces]
    assert seq.makespan == pytest.approx(sum(alone))
    assert np.allclose(seq.ends - seq.starts, alone)
    assert conc.makespan <= seq.makespan * (1 + 1e-12)
    assert np.all(conc.ends <= conc.makespan)
    assert conc.ends.max() == conc.makespan
    # adding a job never speeds the set up
    more = schedule_concurrent(traces + _traces(seed + 1, 1), budgets + [budget], CFG)
    assert more.makespan >= conc.makespan
    one = schedule_concurrent(traces[:1], budgets[:1], CFG)
    assert one.makespan == pytest.approx(alone[0])
