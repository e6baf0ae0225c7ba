import math
from fractions import Fraction

import numpy as np
import pytest

from robustq.boolfn import make_named
from robustq.poly import CopyLayout, MultilinearPoly, PolyError, Var, exact_multilinear
from robustq.robustness import (
    PerturbationSpec,
    boost_parameters,
    boost_type1,
    certificate_amplification_degree,
    certificate_robustify,
    check_type2_grid,
    check_type2_vertex,
    copies_for_type1,
    estimate_type1,
    sample_perturbation,
    type1_to_type2,
    type2_to_type1,
)

F = Fraction
PARITY2 = make_named("parity", 2)
ROBUST_PARITY2 = MultilinearPoly(2, {(): F(-5, 27), (0,): F(38, 27), (1,): F(38, 27), (0, 1): F(-80, 27)})


def test_exact_parity_fails_vertex_check():
    rep = check_type2_vertex(exact_multilinear(PARITY2), PARITY2, F(1, 3))
    assert not rep.passed
    assert rep.worst_violation == F(1, 9)
    assert rep.witness == ((0, 0), (F(1, 3), F(1, 3)))


def test_exact_polynomial_passes_at_zero_noise():
    p = exact_multilinear(make_named("majority", 3))
    assert check_type2_vertex(p, make_named("majority", 3), 0).passed


def test_vertex_check_rejects_expressions():
    with pytest.raises(PolyError):
        check_type2_vertex(Var(0, 2), PARITY2, F(1, 4))


def test_grid_check_agrees_with_vertex_check():
    rep = check_type2_grid(exact_multilinear(PARITY2), PARITY2, 1 / 3)
    assert not rep.passed and abs(rep.worst_violation - 1 / 9) < 1e-12
    assert rep.evidence == "grid"
    assert check_type2_grid(ROBUST_PARITY2, PARITY2, 0.25, tolerance=1e-12).passed


def test_perturbation_rate():
    rng = np.random.default_rng(3)
    y = sample_perturbation(np.zeros(4, dtype=np.uint8), PerturbationSpec(0.1, 5000), rng)
    assert y.shape == (4, 5000)
    assert abs(y.mean() - 0.1) < 0.01


def test_perturbation_spec_validation():
    with pytest.raises(ValueError):
        PerturbationSpec(0.5)
    with pytest.raises(ValueError):
        PerturbationSpec(0.1, 0)


def test_type2_to_type1_passes_estimate():
    q, m = type2_to_type1(ROBUST_PARITY2, F(1, 4), 2)
    assert m == copies_for_type1(2, 0.25) == math.ceil(2 * math.log(6) / 0.25**2)
    rep = estimate_type1(q, PARITY2, PerturbationSpec(0.125, m), 400, np.random.default_rng(0))
    assert rep.passed, rep.details


def test_exact_parity_is_not_type1_robust_with_one_copy():
    p = exact_multilinear(make_named("parity", 3))
    rep = estimate_type1(p, make_named("parity", 3), PerturbationSpec(0.3, 1), 500, np.random.default_rng(1))
    assert not rep.passed


def test_type1_to_type2_is_expectation():
    layout = CopyLayout(2, 2)
    p = MultilinearPoly(4, {(0, 3): F(1), (1,): F(1, 2)})
    q = type1_to_type2(p, layout)
    assert q([F(1, 3), F(1, 5)]) == F(1, 3) * F(1, 5) + F(1, 2) * F(1, 3)


def test_boost_parameters():
    r, k = boost_parameters(1 / 9)
    assert r == math.ceil(2 * math.log(9)) and k == 2 * math.ceil(36 * math.log(9)) + 1


def test_boost_identity_at_third():
    p = exact_multilinear(PARITY2)
    assert boost_type1(p, 2, 1 / 3, PerturbationSpec(0.1)).expr is p


def test_boost_reduces_error():
    p = exact_multilinear(make_named("or", 2))
    spec = PerturbationSpec(0.05)
    boosted = boost_type1(p, 2, 0.05, spec, k=9, r=9)
    assert boosted.layout == CopyLayout(2, 9)
    assert boosted.expr.degree() == 9 * 3 * 2
    f = make_named("or", 2)
    plain = estimate_type1(p, f, spec, 2000, np.random.default_rng(2), bound=0.05)
    rep = estimate_type1(boosted.expr, f, PerturbationSpec(0.05, 9), 2000, np.random.default_rng(2), bound=0.05)
    # a single flip already breaks p at x = 00: rate 1 - 0.95^2
    assert abs(plain.details["max_failure_rate"] - 0.0975) < 0.02
    assert rep.details["max_failure_upper"] < plain.details["max_failure_rate"]


def test_certificate_degree():
    assert certificate_amplification_degree(1) % 2 == 1
    assert math.exp(-certificate_amplification_degree(3) / 72) <= 1 / 30


def test_certificate_robustify_passes_grid():
    f = make_named("or", 2)
    q = certificate_robustify(exact_multilinear(f), f, F(0))
    rep = check_type2_grid(q, f, 1 / 10, points_per_box=4)
    assert rep.passed


def test_certificate_robustify_checks_approximation():
    with pytest.raises(ValueError):
        certificate_robustify(MultilinearPoly(2, {}), PARITY2, F(1, 3))
