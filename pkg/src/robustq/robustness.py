"""Type-1 and type-2 robustness checks, boosting, the conversions between the
two types, and certificate-based robustification.

Type-2 boxes are the restricted ones: z_i in [0, eps] when x_i = 0 and
z_i in [1 - eps, 1] when x_i = 1.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from .boolfn import all_inputs, max_certificate_complexity
from .poly import (
    AmplificationPoly,
    Compose,
    CopyLayout,
    MultilinearPoly,
    PolyError,
    PolyExpr,
    UniApply,
    Var,
    expand_boolean,
    expectation_polynomial,
    substitute,
)
from .stats import wilson_ci

THIRD = Fraction(1, 3)
VERTEX_MAX_ARITY = 12


@dataclass(frozen=True)
class PerturbationSpec:
    epsilon: float
    m: int = 1

    def __post_init__(self):
        if not 0 <= self.epsilon < 0.5:
            raise ValueError("epsilon must lie in [0, 1/2)")
        if self.m < 1:
            raise ValueError("need at least one copy per bit")


@dataclass
class RobustnessReport:
    passed: bool
    worst_violation: Any
    witness: tuple | None
    points: int
    evidence: str  # "exact", "grid" (evidence only) or "statistical"
    details: dict = field(default_factory=dict)

    def to_record(self) -> str:
        lines = [
            f"passed: {self.passed}",
            f"evidence: {self.evidence}",
            f"worst_violation: {self.worst_violation}",
            f"points: {self.points}",
        ]
        if self.witness is not None:
            x, z = self.witness
            lines.append("witness_x: " + "".join(str(int(b)) for b in x))
            lines.append("witness_z: " + " ".join(str(v) for v in z))
        for key, value in self.details.items():
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"


def sample_perturbation(x, spec: PerturbationSpec, rng: np.random.Generator) -> np.ndarray:
    """n x m bits, each equal to x_i with probability exactly 1 - epsilon."""
    x = np.asarray(x, dtype=np.uint8)
    flips = rng.random((x.size, spec.m)) < spec.epsilon
    return (x[:, None] ^ flips).astype(np.uint8)


def _box(bit: int, eps):
    return (0, eps) if bit == 0 else (1 - eps, 1)


def check_type2_vertex(p: MultilinearPoly, f, epsilon, bound=THIRD) -> RobustnessReport:
    """Exact type-2 check for multilinear p.

    A multilinear polynomial is affine in each coordinate, so its extremes
    over a box sit at the box vertices; 2^n vertices per input x suffice.
    """
    if not isinstance(p, MultilinearPoly):
        raise PolyError("vertex check needs a multilinear polynomial; use check_type2_grid")
    if p.nvars != f.n:
        raise PolyError(f"polynomial has {p.nvars} variables, function arity is {f.n}")
    if f.n > VERTEX_MAX_ARITY:
        raise PolyError(f"vertex check is limited to n <= {VERTEX_MAX_ARITY}")
    worst, witness, count = None, None, 0
    for x in all_inputs(f.n):
        fx = f(x)
        for z in itertools.product(*(_box(int(b), epsilon) for b in x)):
            gap = abs(p.eval_at(z) - fx) - bound
            count += 1
            if worst is None or gap > worst:
                worst, witness = gap, (tuple(int(b) for b in x), z)
    return RobustnessReport(worst <= 0, max(worst, 0), witness, count, "exact")


def check_type2_grid(p: PolyExpr, f, epsilon, points_per_box: int = 5, tolerance: float = 0.0,
                     bound: float = 1 / 3, chunk: int = 200_000) -> RobustnessReport:
    """Grid search inside every box. A PASS is evidence, not proof."""
    if points_per_box < 2:
        raise ValueError("need at least 2 grid points per box coordinate")
    if p.nvars != f.n:
        raise PolyError(f"polynomial has {p.nvars} variables, function arity is {f.n}")
    eps = float(epsilon)
    low = np.linspace(0.0, eps, points_per_box)
    high = np.linspace(1.0 - eps, 1.0, points_per_box)
    grid = np.stack(np.meshgrid(*([np.arange(points_per_box)] * f.n), indexing="ij"), -1).reshape(-1, f.n)
    worst, witness, count = -np.inf, None, 0
    for x in all_inputs(f.n):
        fx = f(x)
        axes = np.where(x[None, :] == 1, high[grid], low[grid])
        for start in range(0, len(axes), chunk):
            z = axes[start:start + chunk]
            gaps = np.abs(np.asarray(p(z), dtype=float) - fx) - bound
            k = int(np.argmax(gaps))
            count += len(z)
            if gaps[k] > worst:
                worst, witness = float(gaps[k]), (tuple(int(b) for b in x), tuple(z[k].tolist()))
    return RobustnessReport(worst <= tolerance, max(worst, 0.0), witness, count, "grid",
                            {"note": "grid search; PASS is evidence only"})


def estimate_type1(p: PolyExpr, f, spec: PerturbationSpec, trials: int, rng: np.random.Generator,
                   bound: float = 1 / 3, inputs=None, range_samples: int = 1000,
                   level: float = 0.95) -> RobustnessReport:
    """Monte Carlo estimate of Pr[|p(y) - f(x)| > bound] per input x.

    PASS when every tested x has its Wilson upper bound below 1/3 and p stays
    in [-1/3, 4/3] on the sampled Boolean points.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials per input")
    n, m = f.n, spec.m
    if p.nvars != n * m:
        raise PolyError(f"polynomial has {p.nvars} variables, expected n*m = {n * m}")
    if inputs is None:
        if n > 12:
            raise ValueError("pass an explicit sample of inputs for n > 12")
        inputs = all_inputs(n)
    inputs = np.asarray(inputs, dtype=np.uint8)
    worst_rate, worst_upper = 0.0, 0.0
    worst_gap, witness = -np.inf, None
    rates = {}
    for x in inputs:
        fx = f(x)
        flips = rng.random((trials, n, m)) < spec.epsilon
        y = (x[None, :, None] ^ flips).reshape(trials, n * m).astype(float)
        dev = np.abs(np.asarray(p(y), dtype=float) - fx)
        fails = int(np.count_nonzero(dev > bound))
        upper = wilson_ci(fails, trials, level)[1]
        key = "".join(str(int(b)) for b in x)
        rates[key] = fails / trials
        worst_rate = max(worst_rate, fails / trials)
        worst_upper = max(worst_upper, upper)
        k = int(np.argmax(dev))
        if dev[k] - bound > worst_gap:
            worst_gap, witness = float(dev[k] - bound), (tuple(int(b) for b in x), tuple(y[k].astype(int).tolist()))
    v = (rng.random((range_samples, n * m)) < 0.5).astype(float)
    vals = np.asarray(p(v), dtype=float)
    range_ok = bool(np.all((vals >= -1 / 3 - 1e-12) & (vals <= 4 / 3 + 1e-12)))
    passed = worst_upper < 1 / 3 and range_ok
    return RobustnessReport(
        passed, max(worst_gap, 0.0), witness, len(inputs) * trials, "statistical",
        {"max_failure_rate": worst_rate, "max_failure_upper": worst_upper,
         "range_ok": range_ok, "failure_rates": rates},
    )


@dataclass(frozen=True)
class BoostResult:
    expr: PolyExpr
    layout: CopyLayout
    k0: int
    k: int
    r: int

    @property
    def m(self) -> int:
        return self.layout.m


def boost_parameters(delta: float, c: float = 2.0) -> tuple[int, int]:
    """(r, k) for target error delta: r = ceil(c ln 1/delta), k = 2 ceil(36 ln 1/delta) + 1."""
    log_inv = math.log(1 / delta)
    return max(1, math.ceil(c * log_inv)), 2 * math.ceil(36 * log_inv) + 1


def boost_type1(p: PolyExpr, d: int, delta: float, spec: PerturbationSpec, k0: int = 3,
                k: int | None = None, r: int | None = None) -> BoostResult:
    """q(y) = h_k((1/r) sum_b h_k0(p(y_b))) over r independent copy blocks.

    Degree is k * k0 * d and the copy count grows to m * r. With h_3 the inner
    values stay in [0, 1] for p(v) in [-1/3, 4/3], so q is in [0, 1] on Boolean
    inputs. delta = 1/3 without overrides returns p itself.
    """
    if not 0 < delta <= 1 / 3 + 1e-12:
        raise ValueError("delta must lie in (0, 1/3]")
    m = spec.m
    if p.nvars % m:
        raise PolyError("polynomial variable count is not a multiple of the copy count")
    n = p.nvars // m
    if k is None and r is None and abs(delta - 1 / 3) < 1e-12:
        return BoostResult(p, CopyLayout(n, m), 1, 1, 1)
    r_def, k_def = boost_parameters(delta)
    r = r if r is not None else r_def
    k = k if k is not None else k_def
    if k0 % 2 == 0 or k % 2 == 0:
        raise ValueError("amplification degrees must be odd")
    big = CopyLayout(n, m * r)
    inner_amp = AmplificationPoly(k0) if k0 > 1 else None
    blocks = []
    for b in range(r):
        leaves = [Var(big.index(i, b * m + j), big.nvars) for i in range(n) for j in range(m)]
        block = substitute(p, leaves)
        blocks.append(UniApply(inner_amp, block) if inner_amp else block)
    avg = MultilinearPoly(r, {(b,): Fraction(1, r) for b in range(r)})
    averaged = Compose(avg, tuple(blocks))
    expr = UniApply(AmplificationPoly(k), averaged) if k > 1 else averaged
    return BoostResult(expr, big, k0, k, r)


def copies_for_type1(n: int, epsilon: float, c: float = 2.0) -> int:
    """m = ceil(c ln(3n) / (1/2 - eps)^2)."""
    return max(1, math.ceil(c * math.log(3 * n) / (0.5 - float(epsilon)) ** 2))


def type2_to_type1(q: PolyExpr, epsilon, n: int, c: float = 2.0, m: int | None = None):
    """q applied to per-bit copy averages; returns (expression over n*m vars, m)."""
    if q.nvars != n:
        raise PolyError(f"polynomial has {q.nvars} variables, expected {n}")
    m = m if m is not None else copies_for_type1(n, epsilon, c)
    layout = CopyLayout(n, m)
    averages = [MultilinearPoly(layout.nvars, {(layout.index(i, j),): Fraction(1, m) for j in range(m)})
                for i in range(n)]
    return substitute(q, averages), m


def type1_to_type2(p: PolyExpr, layout: CopyLayout) -> PolyExpr:
    """q(z) = E[p(y)] for independent y_{i,j} with mean z_i.

    p must be multilinear, or small enough to expand into multilinear form on
    Boolean points. Boost p to the 1/9 error level before calling when the
    type-2 guarantee is wanted.
    """
    if not isinstance(p, MultilinearPoly):
        p = expand_boolean(p)
    return expectation_polynomial(p, layout)


def certificate_amplification_degree(c: int) -> int:
    """Smallest odd k with e^{-k/72} <= 1/(10c)."""
    k = math.ceil(72 * math.log(10 * c))
    return k if k % 2 else k + 1


def certificate_robustify(p: PolyExpr, f, eps_approx) -> PolyExpr:
    """Replace each z_i by h_k(z_i) with k from the certificate complexity of f."""
    if p.nvars != f.n:
        raise PolyError(f"polynomial has {p.nvars} variables, function arity is {f.n}")
    xs = all_inputs(f.n)
    exact = all(isinstance(v, (int, Fraction)) for v in getattr(p, "terms", {}).values())
    for x in xs:
        point = [int(b) for b in x] if exact else x.astype(float)
        if abs(p(point) - f(x)) > eps_approx:
            raise ValueError(f"polynomial is not {eps_approx}-approximating at x={x.tolist()}")
    k = certificate_amplification_degree(max_certificate_complexity(f))
    amp = AmplificationPoly(k)
    return substitute(p, [UniApply(amp, Var(i, f.n)) for i in range(f.n)])
