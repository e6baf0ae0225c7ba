import math

import numpy as np
import pytest

from robustq.noisysim import NoisyOracleSet, OracleView
from robustq.qsearch import (
    RobustFindParams,
    cross_validate_backends,
    grover_robust,
    query_distance,
    robust_find_contract,
    robust_find_cost,
    robustified_query,
)
from robustq.qsearch.statevector import (
    StateBudgetExceeded,
    StateVector,
    closed_form_success,
    query_distance_closed_form,
)
from robustq.stats import fit_exponent, wilson_ci


def test_cost_formula():
    p = RobustFindParams(0.01, 0.01, 0.01, 0.01)
    raw = 10 * math.log(1e4) / 0.49**2
    assert robust_find_cost(p) == math.ceil(raw) == 384
    assert robust_find_cost(p, 2.0) == math.ceil(2 * raw)


@pytest.mark.parametrize("bad", [(0.5, 0.1, 0.1, 0.1), (0.1, 0, 0.1, 0.1), (0.1, 1.5, 0.1, 0.1),
                                 (0.1, 0.1, 0, 0.1), (0.1, 0.1, 0.1, 1)])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        RobustFindParams(*bad)


def _calls(x, params, calls, mode="interpolating", seed=0):
    o = NoisyOracleSet(np.asarray(x, dtype=np.uint8), params.eps)
    view = OracleView(o)
    rng = np.random.default_rng(seed)
    outs = [robust_find_contract(view, params, rng, mode) for _ in range(calls)]
    return outs, o.ledger


def test_all_ones_found():
    params = RobustFindParams(0.01, 0.5, 0.01, 0.01)
    outs, ledger = _calls(np.ones(32), params, 10_000)
    miss = sum(o.index is None for o in outs)
    assert wilson_ci(miss, 10_000)[0] <= 0.01
    assert all(0 <= o.index < 32 for o in outs if o.index is not None)
    assert ledger.invocations == 10_000 * robust_find_cost(params)


def test_all_zeros_rarely_returns():
    params = RobustFindParams(0.01, 0.5, 0.01, 0.01)
    outs, _ = _calls(np.zeros(32), params, 10_000)
    hits = sum(o.index is not None for o in outs)
    assert wilson_ci(hits, 10_000)[0] <= 0.01


def test_contract_rates_within_declared_bounds():
    x = np.zeros(64, dtype=np.uint8)
    x[:16] = 1
    params = RobustFindParams(0.01, 0.2, 0.05, 0.05)
    outs, _ = _calls(x, params, 100_000, seed=4)
    found = [o.index for o in outs if o.index is not None]
    miss = len(outs) - len(found)
    wrong = sum(1 for i in found if x[i] == 0)
    assert wilson_ci(miss, len(outs))[0] <= 0.05
    assert wilson_ci(wrong, len(found))[0] <= 0.05
    # correct answers are spread over all ones
    assert set(i for i in found if x[i]) == set(range(16))


def test_interpolating_below_threshold():
    x = np.zeros(100, dtype=np.uint8)
    x[:5] = 1
    params = RobustFindParams(0.0, 0.1, 0.01, 0.01)
    outs, _ = _calls(x, params, 20_000, seed=7)
    rate = sum(o.index is not None for o in outs) / 20_000
    assert abs(rate - 0.99 * 0.5) < 0.015


def test_adversarial_below_threshold_never_finds():
    x = np.zeros(100, dtype=np.uint8)
    x[:5] = 1
    params = RobustFindParams(0.0, 0.1, 0.01, 0.01)
    outs, _ = _calls(x, params, 2000, mode="adversarial")
    assert all(o.index is None for o in outs)


def test_unknown_mode():
    with pytest.raises(ValueError):
        _calls(np.ones(4), RobustFindParams(0, 0.5, 0.1, 0.1), 1, mode="optimistic")


def test_distance_zero_without_noise():
    assert query_distance([0, 1, 1], 0.0, 1) == 0.0


def test_single_copy_distance_closed_form():
    assert abs(query_distance([0, 1], 0.05, 1) - 2 * math.sqrt(0.05)) < 1e-9


@pytest.mark.parametrize("r", [1, 3, 5, 9, 13])
def test_distance_matches_majority_tail(r):
    assert abs(query_distance([0, 1], 0.05, r) - query_distance_closed_form(0.05, r)) < 1e-9


def test_distance_decays_exponentially():
    rs = list(range(1, 16, 2))
    d = [query_distance([1], 0.05, r) for r in rs]
    assert all(a > b for a, b in zip(d, d[1:]))
    fit = fit_exponent([(2.0**r, v) for r, v in zip(rs, d)])
    # slope in base 2: distance ~ 2^(slope * r)
    assert fit.slope <= -1 / 10


def test_even_ancilla_count_rejected():
    with pytest.raises(ValueError):
        robustified_query([0, 1], 0.1, 2)


def test_memory_budget():
    with pytest.raises(StateBudgetExceeded):
        robustified_query(np.zeros(16), 0.1, 21)


def test_norm_preserved():
    st = StateVector.zeros(4, 3)
    st.amplitudes[(slice(None), 0, 0, 0, 0)] = 0.5
    robustified_query([0, 1, 0, 1], 0.1, 3).apply(st)
    assert abs(st.norm() - 1) < 1e-10


@pytest.mark.parametrize("n", [4, 8, 16])
@pytest.mark.parametrize("w", [1, 2])
def test_noiseless_grover_matches_closed_form(n, w):
    x = np.zeros(n, dtype=np.uint8)
    x[:w] = 1
    assert abs(grover_robust(x, 0.0, 1).success_probability - closed_form_success(n, w)) < 1e-6


def test_grover_n4_certain():
    assert abs(grover_robust([0, 0, 1, 0], 0, 1).success_probability - 1) < 1e-12


def test_noisy_grover_close_to_noiseless():
    x = np.zeros(8, dtype=np.uint8)
    x[5] = 1
    res = grover_robust(x, 0.05, 9, np.random.default_rng(0), shots=10_000)
    ideal = closed_form_success(8, 1)
    assert abs(res.success_probability - ideal) < 0.05
    assert abs(res.empirical_success - ideal) < 0.05


def test_grover_without_marked_index_is_flagged():
    res = grover_robust(np.zeros(8), 0.05, 3)
    assert res.flagged and np.allclose(res.distribution, 1 / 8)


def test_cross_validation_all_ones():
    report = cross_validate_backends(np.ones(8), 0.0, RobustFindParams(0.0, 0.5, 0.1, 0.01), 2000,
                                     np.random.default_rng(0))
    for backend in ("statevector", "contract"):
        assert report[backend]["miss_rate"] <= 0.02


def test_cross_validation_single_marked():
    x = np.zeros(8, dtype=np.uint8)
    x[2] = 1
    report = cross_validate_backends(x, 0.05, RobustFindParams(0.05, 1 / 8, 0.1, 0.01), 10_000,
                                     np.random.default_rng(1))
    assert 1 - report["statevector"]["wrong_rate"] >= 0.9
    assert report["statevector"]["satisfies"] and report["contract"]["satisfies"]
