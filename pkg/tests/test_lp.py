from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from robustq.boolfn import make_named
from robustq.lp import ACTIVE_SET_THRESHOLD, lp_feasibility, verify_farkas, verify_witness
from robustq.lpdegree import approx_degree, robust_degree_multilinear
from robustq.poly import MultilinearPoly
from robustq.robustness import check_type2_vertex

F = Fraction


def test_simple_feasible_box():
    A = [[1], [-1]]
    b = [F(2), F(-1)]
    res = lp_feasibility(A, b)
    assert res.feasible and res.exact and verify_witness(A, b, res.witness)


def test_simple_infeasible_with_farkas():
    A = [[1], [-1]]
    b = [F(1), F(-2)]
    res = lp_feasibility(A, b)
    assert not res.feasible and verify_farkas(A, b, res.farkas)


def test_empty_system_is_feasible():
    assert lp_feasibility([], []).feasible


def test_shape_errors():
    with pytest.raises(ValueError):
        lp_feasibility([[1, 2], [1]], [0, 0])
    with pytest.raises(ValueError):
        lp_feasibility([[1]], [0, 0])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 6), st.data())
def test_verdict_always_certified(k, m, data):
    entry = st.integers(-3, 3).map(F)
    A = [data.draw(st.lists(entry, min_size=k, max_size=k)) for _ in range(m)]
    b = data.draw(st.lists(st.integers(-3, 3).map(F), min_size=m, max_size=m))
    res = lp_feasibility(A, b)
    if res.feasible:
        assert verify_witness(A, b, res.witness)
    else:
        assert verify_farkas(A, b, res.farkas)


def test_active_set_path_on_many_rows():
    # |c - i/400| <= 1 for all i: feasible, far above the active-set threshold
    A, b = [], []
    for i in range(ACTIVE_SET_THRESHOLD + 100):
        A += [[F(1)], [F(-1)]]
        b += [F(i, 400) + 1, 1 - F(i, 400)]
    res = lp_feasibility(A, b)
    assert res.feasible and verify_witness(A, b, res.witness)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_parity_approx_degree_is_full(n):
    res = approx_degree(make_named("parity", n))
    assert res.degree == n and (n - 1) in res.infeasible_at


def test_or2_approx_degree_witness():
    res = approx_degree(make_named("or", 2))
    assert res.degree == 1
    assert res.witness == MultilinearPoly(2, {(): F(1, 3), (0,): F(1, 3), (1,): F(1, 3)})


def test_and3_approx_degree_is_linear():
    # (w - 1)/3 stays within 1/3 of AND_3 at every weight w
    res = approx_degree(make_named("and", 3))
    assert res.degree == 1 and 0 in res.infeasible_at


def test_robust_parity2_inconclusive_at_third():
    res = robust_degree_multilinear(make_named("parity", 2), F(1, 3))
    assert res.status == "inconclusive" and res.degree is None
    assert res.upper_bound_only


def test_robust_parity2_quarter_regression():
    res = robust_degree_multilinear(make_named("parity", 2), F(1, 4))
    assert res.degree == 2
    assert res.witness.terms == {(): F(-5, 27), (0,): F(38, 27), (1,): F(38, 27), (0, 1): F(-80, 27)}
    assert check_type2_vertex(res.witness, make_named("parity", 2), F(1, 4)).passed


def test_degree_search_arity_limits():
    with pytest.raises(ValueError):
        approx_degree(make_named("or", 9))
    with pytest.raises(ValueError):
        robust_degree_multilinear(make_named("or", 7))
