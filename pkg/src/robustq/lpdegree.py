"""LP degree searches over multilinear polynomials.

Robust-degree results only search multilinear polynomials, so they are upper
bounds on the type-2 robust degree (which may be attained by a
non-multilinear polynomial); the ``upper_bound_only`` flag says so.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .boolfn import all_inputs
from .lp import LPResult, lp_feasibility
from .poly import MultilinearPoly
from .robustness import THIRD, check_type2_vertex

APPROX_MAX_ARITY = 8
ROBUST_MAX_ARITY = 6


@dataclass
class DegreeSearchResult:
    degree: int | None
    witness: MultilinearPoly | None
    status: str  # "feasible" or "inconclusive"
    infeasible_at: dict[int, list] = field(default_factory=dict)
    constraints_checked: int = 0
    exact: bool = True
    upper_bound_only: bool = False
    epsilon: Fraction | float = 0
    err: Fraction | float = THIRD

    def to_record(self) -> str:
        lines = [
            f"status: {self.status}",
            f"degree: {self.degree}",
            f"epsilon: {self.epsilon}",
            f"err: {self.err}",
            f"exact: {self.exact}",
            f"upper_bound_only: {self.upper_bound_only}",
            f"infeasible_degrees: {sorted(self.infeasible_at)}",
            f"constraints_checked: {self.constraints_checked}",
        ]
        return "\n".join(lines) + "\n"


def monomials_up_to(n: int, d: int) -> list[tuple[int, ...]]:
    return [m for size in range(d + 1) for m in itertools.combinations(range(n), size)]


def _monomial_row(monos, z):
    row = []
    for mono in monos:
        v = Fraction(1)
        for i in mono:
            v *= z[i]
        row.append(v)
    return row


def _two_sided(monos, points, targets, err):
    A, b = [], []
    for z, fx in zip(points, targets):
        row = _monomial_row(monos, z)
        A.append(row)
        b.append(fx + err)
        A.append([-v for v in row])
        b.append(err - fx)
    return A, b


def _search(f, points, targets, err, max_degree, check) -> DegreeSearchResult:
    n = f.n
    result = DegreeSearchResult(None, None, "inconclusive", err=err)
    for d in range(max_degree + 1):
        monos = monomials_up_to(n, d)
        A, b = _two_sided(monos, points, targets, err)
        res: LPResult = lp_feasibility(A, b)
        result.constraints_checked += len(A)
        result.exact = result.exact and res.exact
        if res.feasible:
            witness = MultilinearPoly(n, dict(zip(monos, res.witness)))
            if not check(witness):
                raise AssertionError(f"LP witness at degree {d} failed its exact re-check")
            result.degree, result.witness, result.status = d, witness, "feasible"
            return result
        result.infeasible_at[d] = res.farkas
    return result


def approx_degree(f, err=THIRD) -> DegreeSearchResult:
    """Smallest d with a multilinear p, deg p <= d, |p(x) - f(x)| <= err on {0,1}^n."""
    if f.n > APPROX_MAX_ARITY:
        raise ValueError(f"approximate-degree search is limited to n <= {APPROX_MAX_ARITY}")
    err = Fraction(err) if not isinstance(err, float) else err
    xs = all_inputs(f.n)
    points = [[Fraction(int(b)) for b in x] for x in xs]
    targets = [f(x) for x in xs]

    def check(p):
        return all(abs(p.eval_at(z) - t) <= err for z, t in zip(points, targets))

    return _search(f, points, targets, err, f.n, check)


def robust_degree_multilinear(f, epsilon=THIRD, err=THIRD) -> DegreeSearchResult:
    """Smallest d with a multilinear type-2 epsilon-robust p of degree d.

    Constraints sit at every box vertex, which is exact for multilinear p.
    The search stops at d = n; no feasible degree leaves the result
    inconclusive about the true robust degree.
    """
    if f.n > ROBUST_MAX_ARITY:
        raise ValueError(f"robust-degree search is limited to n <= {ROBUST_MAX_ARITY}")
    epsilon = Fraction(epsilon) if not isinstance(epsilon, float) else epsilon
    err = Fraction(err) if not isinstance(err, float) else err
    points, targets = [], []
    for x in all_inputs(f.n):
        boxes = [(0, epsilon) if b == 0 else (1 - epsilon, 1) for b in x]
        for z in itertools.product(*boxes):
            points.append([Fraction(v) for v in z])
            targets.append(f(x))

    def check(p):
        return check_type2_vertex(p, f, epsilon, err).passed

    result = _search(f, points, targets, err, f.n, check)
    result.upper_bound_only = True
    result.epsilon = epsilon
    return result
