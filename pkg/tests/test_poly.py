import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from robustq.boolfn import all_inputs, make_named
from robustq.poly import (
    AmplificationPoly,
    CopyLayout,
    MultilinearPoly,
    PolyError,
    UniApply,
    Var,
    evaluate,
    exact_multilinear,
    expand_boolean,
    expectation_polynomial,
    expectation_substitution,
    from_text,
    stretched_amplification,
    substitute,
    to_text,
)

coef = st.fractions(min_value=-3, max_value=3, max_denominator=7)


@st.composite
def multilinear(draw, nvars=None, max_terms=6):
    n = nvars if nvars is not None else draw(st.integers(1, 5))
    monos = draw(st.lists(st.sets(st.integers(0, n - 1), max_size=n), max_size=max_terms))
    return MultilinearPoly(n, {tuple(sorted(m)): draw(coef) for m in monos})


def test_amplification_coefficients():
    assert AmplificationPoly(3).coeffs == (0, 0, 3, -2)
    assert AmplificationPoly(3)(Fraction(1, 3)) == Fraction(7, 27)


@pytest.mark.parametrize("k", [1, 3, 5, 25])
def test_amplification_matches_binomial_sum(k):
    h = AmplificationPoly(k)
    for x in (Fraction(1, 5), Fraction(1, 2), Fraction(7, 9)):
        direct = sum(math.comb(k, i) * x**i * (1 - x) ** (k - i) for i in range(k // 2 + 1, k + 1))
        assert h(x) == direct


def test_amplification_float_path_is_stable():
    h = AmplificationPoly(97)
    assert abs(h(1 / 3) - float(h(Fraction(1, 3)))) < 1e-12
    assert abs(h(0.5) - 0.5) < 1e-12


def test_amplification_rejects_even():
    with pytest.raises(PolyError):
        AmplificationPoly(4)


@given(st.integers(0, 30).map(lambda j: 2 * j + 1), st.fractions(0, 1, max_denominator=50))
def test_amplification_symmetry(k, x):
    h = AmplificationPoly(k)
    assert h(x) + h(1 - x) == 1


def test_stretch_map():
    s = stretched_amplification(1)
    assert s([Fraction(-2, 5)]) == 0 and s([Fraction(7, 5)]) == 1


@pytest.mark.parametrize("name", ["parity", "or", "majority"])
def test_exact_multilinear_agrees_on_cube(name):
    f = make_named(name, 3)
    p = exact_multilinear(f)
    for x in all_inputs(3):
        assert p([int(b) for b in x]) == f(x)


def test_exact_parity_coefficients():
    p = exact_multilinear(make_named("parity", 2))
    assert p.terms == {(0,): 1, (1,): 1, (0, 1): -2}
    assert p([Fraction(1, 3), Fraction(1, 3)]) == Fraction(4, 9)


@settings(max_examples=40)
@given(multilinear(), st.data())
def test_batch_matches_exact(p, data):
    z = data.draw(st.lists(st.fractions(0, 1, max_denominator=9), min_size=p.nvars, max_size=p.nvars))
    exact = p(z)
    batch = p(np.array([[float(v) for v in z]]))
    assert abs(float(exact) - float(batch[0])) < 1e-9


@settings(max_examples=40)
@given(multilinear())
def test_text_roundtrip(p):
    assert from_text(to_text(p), p.nvars) == p


def test_text_rejects_garbage():
    with pytest.raises(PolyError):
        from_text("1/2 * y3\n", 4)


def test_degree_rules():
    p = MultilinearPoly(2, {(0, 1): 1})
    q = substitute(p, [UniApply(AmplificationPoly(5), Var(0, 3)), Var(2, 3)])
    assert q.degree() == 6
    assert UniApply(AmplificationPoly(3), q).degree() == 18


@settings(max_examples=30, deadline=None)
@given(multilinear(nvars=3), multilinear(nvars=2))
def test_substitute_then_expand_agrees_on_booleans(outer, inner):
    expr = substitute(outer, [inner, Var(0, 2), Var(1, 2)])
    flat = expand_boolean(expr)
    for x in itertools.product((0, 1), repeat=2):
        assert flat(list(x)) == evaluate(expr, list(x))


def test_shared_subexpression_is_evaluated_once():
    leaf = UniApply(AmplificationPoly(3), Var(0, 1))
    calls = []
    original = leaf._eval

    def counting(z, memo):
        calls.append(1)
        return original(z, memo)

    object.__setattr__(leaf, "_eval", counting)
    p = MultilinearPoly(3, {(0, 1, 2): 1})
    expr = substitute(p, [leaf, leaf, leaf])
    assert expr([Fraction(1, 2)]) == Fraction(1, 8)
    assert len(calls) == 1


@st.composite
def layout_and_poly(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, max(1, 12 // n)))
    return CopyLayout(n, m), draw(multilinear(nvars=n * m, max_terms=8))


def _brute_expectation(p, z, layout):
    total = Fraction(0)
    for y in itertools.product((0, 1), repeat=layout.nvars):
        w = Fraction(1)
        for v, b in enumerate(y):
            zi = z[layout.bit_of(v)]
            w *= zi if b else 1 - zi
        total += w * p(list(y))
    return total


@settings(max_examples=40, deadline=None)
@given(layout_and_poly(), st.data())
def test_expectation_substitution_matches_enumeration(lp, data):
    layout, p = lp
    z = data.draw(st.lists(st.fractions(0, 1, max_denominator=11), min_size=layout.n, max_size=layout.n))
    assert expectation_substitution(p, z, layout) == _brute_expectation(p, z, layout)
    assert expectation_polynomial(p, layout)(z) == _brute_expectation(p, z, layout)


def test_expectation_checks_layout():
    with pytest.raises(PolyError):
        expectation_substitution(MultilinearPoly(4, {(0,): 1}), [0, 0], CopyLayout(2, 3))
