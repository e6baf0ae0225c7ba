import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustq.noisysim import (
    CopyMatrix,
    NoisyOracleSet,
    OracleView,
    QueryLedger,
    copies_count,
    copies_oracle,
)
from robustq.stats import wilson_ci


def bits(n, seed=0):
    return (np.random.default_rng(seed).random(n) < 0.5).astype(np.uint8)


def test_noiseless_view_returns_x():
    x = bits(20)
    view = OracleView(NoisyOracleSet(x, 0))
    rng = np.random.default_rng(1)
    assert [view.invoke(i, rng) for i in range(20)] == x.tolist()


def test_flip_semantics():
    x = bits(10)
    view = OracleView(NoisyOracleSet(x, 0))
    view.flip(3)
    assert view.invoke(3, np.random.default_rng(0)) == 1 - x[3]
    view.flip(3)
    assert view.invoke(3, np.random.default_rng(0)) == x[3]


def test_bernoulli_rate():
    o = NoisyOracleSet(np.ones(1, dtype=np.uint8), 0.1)
    rng = np.random.default_rng(5)
    agree = sum(o.invoke(0, rng) for _ in range(10_000))
    assert abs(agree / 10_000 - 0.9) <= 0.01


def test_invoke_many_matches_rate_and_charges():
    o = NoisyOracleSet(np.zeros(4, dtype=np.uint8), 0.2)
    out = o.invoke_many(np.repeat(np.arange(4), 5000), np.random.default_rng(2))
    assert abs(out.mean() - 0.2) < 0.01
    assert o.ledger.invocations == 20_000


def test_index_out_of_range():
    view = OracleView(NoisyOracleSet(bits(4), 0))
    with pytest.raises(IndexError):
        view.invoke(4, np.random.default_rng(0))
    with pytest.raises(IndexError):
        view.invoke(-1, np.random.default_rng(0))


def test_restricted_view_forces_zero_and_charges():
    x = np.ones(6, dtype=np.uint8)
    o = NoisyOracleSet(x, 0)
    view = OracleView(o, support=[0, 1])
    rng = np.random.default_rng(0)
    assert view.invoke(4, rng) == 0 and view.invoke(0, rng) == 1
    assert o.ledger.invocations == 2
    assert o.ledger.forced == 1 and o.ledger.real == 1


def test_error_validation():
    with pytest.raises(ValueError):
        NoisyOracleSet(bits(3), 0.5)
    with pytest.raises(ValueError):
        NoisyOracleSet(bits(3), 0.1, mode="copies")


def test_ledger_phases_and_reset():
    led = QueryLedger()
    assert led.snapshot_and_reset()["total"] == 0
    with led.phase("part1"):
        led.charge(2)
    with led.phase("part2"):
        led.charge(3)
        with led.phase("inner"):
            led.charge(1)
    led.charge(4)
    snap = led.snapshot_and_reset()
    assert snap["total"] == 10 == sum(snap["by_phase"].values())
    assert snap["by_phase"] == {"part1": 2, "part2": 3, "part2/inner": 1, "default": 4}
    assert led.invocations == 0 and not led.by_phase


def test_ledger_rejects_negative():
    with pytest.raises(ValueError):
        QueryLedger().charge(-1)


def test_unit_cost_scales_queries():
    led = QueryLedger(unit_cost=7)
    led.charge(3)
    assert led.queries == 21


def test_copies_count_formula():
    assert copies_count(16, 0.05) == int(np.ceil(np.log(1600) / 0.0025))


def test_copies_single_column_is_deterministic():
    x = bits(12)
    o = copies_oracle(x, 0.1, np.random.default_rng(0), m=1)
    col = o.copies.y[:, 0]
    rng = np.random.default_rng(1)
    assert [o.invoke(i, rng) for i in range(12)] == col.tolist()


def test_copies_replay_bit_exact():
    x = bits(8)
    o = copies_oracle(x, 0.05, np.random.default_rng(3))
    a = o.invoke_many(np.arange(8).repeat(50), np.random.default_rng(9))
    b = o.invoke_many(np.arange(8).repeat(50), np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_copies_good_event_is_likely():
    n, eps = 16, 0.05
    m = copies_count(n, eps)
    rng = np.random.default_rng(11)
    bad = 0
    trials = 1000
    for _ in range(trials):
        means = (rng.random((n, m)) < eps).mean(axis=1)
        bad += bool(np.any(means > 2 * eps))
    assert wilson_ci(bad, trials)[0] <= 0.01


def test_copies_marginal_is_row_agreement():
    x = np.array([1, 0], dtype=np.uint8)
    o = copies_oracle(x, 0.2, np.random.default_rng(0), m=10)
    reads = o.invoke_many(np.zeros(20_000, dtype=int), np.random.default_rng(1))
    assert abs(reads.mean() - o.copies.y[0].mean()) < 0.015


@settings(max_examples=25)
@given(st.integers(1, 5), st.integers(1, 9), st.data())
def test_copy_matrix_hex_roundtrip(n, m, data):
    y = np.array(data.draw(st.lists(st.lists(st.integers(0, 1), min_size=m, max_size=m), min_size=n, max_size=n)))
    assert np.array_equal(CopyMatrix.from_hex_rows(CopyMatrix(y).to_hex_rows()).y, y)


def test_negated_set_shares_ledger():
    o = NoisyOracleSet(np.array([1, 0], dtype=np.uint8), 0)
    neg = o.negated()
    rng = np.random.default_rng(0)
    assert neg.invoke(0, rng) == 0 and neg.invoke(1, rng) == 1
    assert o.ledger.invocations == 2


@settings(max_examples=40)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=30), st.data())
def test_target_weight_tracks_flips(xs, data):
    x = np.array(xs, dtype=np.uint8)
    n = x.size
    support = data.draw(st.sets(st.integers(0, n - 1)))
    view = OracleView(NoisyOracleSet(x, 0.01), support=sorted(support) if support else None)
    for i in data.draw(st.lists(st.integers(0, n - 1), max_size=40)):
        view.flip(i)
        w = (x ^ view.flip_mask) & view.in_support
        assert view.target_weight() == int(w.sum())
        ones = set(view._target.order[: view._target.k])
        assert ones == set(np.flatnonzero(w).tolist())
