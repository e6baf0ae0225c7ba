"""Polynomial representations: a multilinear core plus unexpanded composition
nodes, evaluation over exact rationals or numpy batches, degree bookkeeping,
and the amplification polynomials.

Evaluation accepts either a plain sequence of numbers (ints, Fractions or
floats; arithmetic stays exact for exact inputs) or a numpy array whose last
axis indexes the variables, which evaluates a whole batch at once.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import betainc

from .boolfn import MAX_TABLE_ARITY

DEFAULT_TERM_CAP = 200_000


class PolyError(ValueError):
    pass


class PolyTooLarge(PolyError):
    pass


def _col(z, i):
    if isinstance(z, np.ndarray):
        return z[..., i]
    return z[i]


def _nvars_of(z) -> int:
    if isinstance(z, np.ndarray):
        return z.shape[-1]
    return len(z)


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


class PolyExpr:
    """Base class for expression nodes over ``nvars`` leaf variables."""

    nvars: int

    def degree(self) -> int:
        raise NotImplementedError

    def _eval(self, z, memo: dict):
        raise NotImplementedError

    def __call__(self, z):
        return evaluate(self, z)


def evaluate(expr: PolyExpr, z):
    """Evaluate ``expr`` at a point (or a batch of points)."""
    if _nvars_of(z) != expr.nvars:
        raise PolyError(f"point has {_nvars_of(z)} coordinates, expression has {expr.nvars} variables")
    return expr._eval(z, {})


def _memo(node: PolyExpr, z, memo: dict):
    key = id(node)
    if key not in memo:
        memo[key] = node._eval(z, memo)
    return memo[key]


@dataclass(frozen=True, eq=False)
class Var(PolyExpr):
    index: int
    nvars: int

    def __post_init__(self):
        if not 0 <= self.index < self.nvars:
            raise PolyError(f"variable {self.index} out of range for {self.nvars} variables")

    def degree(self) -> int:
        return 1

    def _eval(self, z, memo):
        return _col(z, self.index)


@dataclass(frozen=True, eq=False)
class Const(PolyExpr):
    value: object
    nvars: int

    def degree(self) -> int:
        return 0

    def _eval(self, z, memo):
        if isinstance(z, np.ndarray):
            return np.full(z.shape[:-1], float(self.value))
        return self.value


class MultilinearPoly(PolyExpr):
    """Sum of coefficient * product of distinct variables.

    ``terms`` maps strictly increasing index tuples to coefficients; zero
    coefficients are dropped.
    """

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], object] | None = None):
        self.nvars = int(nvars)
        clean: dict[tuple[int, ...], object] = {}
        for mono, coef in (terms or {}).items():
            mono = tuple(mono)
            if any(b <= a for a, b in zip(mono, mono[1:])):
                raise PolyError(f"monomial {mono} is not strictly increasing")
            if mono and not (0 <= mono[0] and mono[-1] < self.nvars):
                raise PolyError(f"monomial {mono} uses a variable outside 0..{self.nvars - 1}")
            if coef != 0:
                clean[mono] = coef
        self.terms = clean

    def __repr__(self):
        return f"MultilinearPoly(nvars={self.nvars}, terms={len(self.terms)})"

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def _eval(self, z, memo):
        return self.eval_at(z)

    def eval_at(self, z):
        batch = isinstance(z, np.ndarray)
        total = np.zeros(z.shape[:-1]) if batch else 0
        for mono, coef in self.terms.items():
            term = float(coef) if batch else coef
            for v in mono:
                term = term * _col(z, v)
            total = total + term
        return total

    def __eq__(self, other):
        if not isinstance(other, MultilinearPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    __hash__ = None

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return MultilinearPoly(max(self.nvars, other.nvars), terms)

    def scale(self, c) -> "MultilinearPoly":
        return MultilinearPoly(self.nvars, {m: c * v for m, v in self.terms.items()})

    def shift(self, c) -> "MultilinearPoly":
        terms = dict(self.terms)
        terms[()] = terms.get((), 0) + c
        return MultilinearPoly(self.nvars, terms)

    def boolean_product(self, other: "MultilinearPoly", cap: int = DEFAULT_TERM_CAP) -> "MultilinearPoly":
        """Product reduced with v*v = v; agrees with the true product on 0/1 points."""
        out: dict[tuple[int, ...], object] = {}
        for m1, c1 in self.terms.items():
            s1 = set(m1)
            for m2, c2 in other.terms.items():
                mono = tuple(sorted(s1.union(m2)))
                out[mono] = out.get(mono, 0) + c1 * c2
            if len(out) > cap:
                raise PolyTooLarge(f"expansion exceeded {cap} terms")
        return MultilinearPoly(max(self.nvars, other.nvars), out)

    @classmethod
    def constant(cls, nvars: int, c) -> "MultilinearPoly":
        return cls(nvars, {(): c})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "MultilinearPoly":
        return cls(nvars, {(i,): 1})


@dataclass(frozen=True, eq=False)
class Compose(PolyExpr):
    """A multilinear polynomial applied to child expressions."""

    outer: MultilinearPoly
    children: tuple

    def __post_init__(self):
        if len(self.children) != self.outer.nvars:
            raise PolyError(f"outer polynomial takes {self.outer.nvars} inputs, got {len(self.children)}")
        sizes = {c.nvars for c in self.children}
        if len(sizes) > 1:
            raise PolyError("children disagree on the variable count")

    @property
    def nvars(self) -> int:
        return self.children[0].nvars if self.children else 0

    def degree(self) -> int:
        child_deg = [c.degree() for c in self.children]
        return max((sum(child_deg[v] for v in mono) for mono in self.outer.terms), default=0)

    def _eval(self, z, memo):
        values = [_memo(c, z, memo) for c in self.children]
        if isinstance(z, np.ndarray):
            return _batch_eval(self.outer, values, z.shape[:-1])
        return self.outer.eval_at(values)


def _batch_eval(poly: MultilinearPoly, values, shape):
    total = np.zeros(shape)
    for mono, coef in poly.terms.items():
        term = float(coef)
        for v in mono:
            term = term * values[v]
        total = total + term
    return total


@dataclass(frozen=True, eq=False)
class Affine(PolyExpr):
    scale: object
    shift: object
    child: PolyExpr

    @property
    def nvars(self) -> int:
        return self.child.nvars

    def degree(self) -> int:
        return self.child.degree() if self.scale != 0 else 0

    def _eval(self, z, memo):
        v = _memo(self.child, z, memo)
        if isinstance(v, np.ndarray) or isinstance(v, float):
            return float(self.scale) * v + float(self.shift)
        return self.scale * v + self.shift


class UnivariatePoly:
    """Coefficients low to high order; trailing zeros are trimmed."""

    def __init__(self, coeffs: Iterable):
        coeffs = list(coeffs)
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        self.coeffs = tuple(coeffs) if coeffs else (0,)
        self._float = None

    def __repr__(self):
        return f"{type(self).__name__}(degree={self.degree()})"

    def __eq__(self, other):
        if not isinstance(other, UnivariatePoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    __hash__ = None

    def degree(self) -> int:
        return 0 if self.coeffs == (0,) else len(self.coeffs) - 1

    def __call__(self, x):
        if _is_exact(x):
            acc = 0
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        return self._horner_float(x)

    def _horner_float(self, x):
        if self._float is None:
            self._float = [float(c) for c in self.coeffs]
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in reversed(self._float):
            acc = acc * x + c
        return acc if acc.ndim else float(acc)


class AmplificationPoly(UnivariatePoly):
    """h_k(x) = P[more than k/2 of k coins with bias x come up 1], k odd.

    Exact inputs use the expanded integer coefficients. Float inputs inside
    [0, 1] go through the regularized incomplete beta function, since the
    alternating coefficient form loses all precision once k is in the tens.
    """

    def __init__(self, k: int):
        if k < 1 or k % 2 == 0:
            raise PolyError("amplification degree k must be a positive odd integer")
        self.k = k
        coeffs = [0] * (k + 1)
        for i in range(k // 2 + 1, k + 1):
            ci = math.comb(k, i)
            for j in range(k - i + 1):
                coeffs[i + j] += ci * math.comb(k - i, j) * (-1) ** j
        super().__init__(coeffs)

    def __call__(self, x):
        if _is_exact(x):
            return super().__call__(x)
        arr = np.asarray(x, dtype=float)
        a = (self.k + 1) / 2
        inside = (arr >= 0) & (arr <= 1)
        if np.all(inside):
            out = betainc(a, a, arr)
        else:
            out = np.asarray(self._horner_float(arr), dtype=float)
            out = np.where(inside, betainc(a, a, np.clip(arr, 0, 1)), out)
        return out if np.ndim(out) else float(out)


@dataclass(frozen=True, eq=False)
class UniApply(PolyExpr):
    poly: UnivariatePoly
    child: PolyExpr

    @property
    def nvars(self) -> int:
        return self.child.nvars

    def degree(self) -> int:
        return self.poly.degree() * self.child.degree()

    def _eval(self, z, memo):
        return self.poly(_memo(self.child, z, memo))


def amplification_poly(k: int) -> AmplificationPoly:
    return AmplificationPoly(k)


# (5x + 2) / 9 maps [-2/5, 7/5] onto [0, 1]; the 1/6 margin around 1/2
# becomes 1/18, which only changes the constant in the exponent.
STRETCH_SCALE = Fraction(5, 9)
STRETCH_SHIFT = Fraction(2, 9)


def stretched_amplification(k: int, child: PolyExpr | None = None) -> UniApply:
    child = child if child is not None else Var(0, 1)
    return UniApply(AmplificationPoly(k), Affine(STRETCH_SCALE, STRETCH_SHIFT, child))


def substitute(p: PolyExpr, inner: Sequence[PolyExpr]) -> PolyExpr:
    """Plug ``inner[i]`` in for variable ``i`` of ``p`` without expanding."""
    inner = tuple(inner)
    if len(inner) != p.nvars:
        raise PolyError(f"expression has {p.nvars} variables, got {len(inner)} substitutes")
    if not inner:
        raise PolyError("nothing to substitute")
    new_nvars = inner[0].nvars
    if any(e.nvars != new_nvars for e in inner):
        raise PolyError("substitutes disagree on the variable count")
    done: dict[int, PolyExpr] = {}

    def walk(node: PolyExpr) -> PolyExpr:
        key = id(node)
        if key in done:
            return done[key]
        if isinstance(node, Var):
            out = inner[node.index]
        elif isinstance(node, Const):
            out = Const(node.value, new_nvars)
        elif isinstance(node, MultilinearPoly):
            out = Compose(node, inner)
        elif isinstance(node, Compose):
            out = Compose(node.outer, tuple(walk(c) for c in node.children))
        elif isinstance(node, UniApply):
            out = UniApply(node.poly, walk(node.child))
        elif isinstance(node, Affine):
            out = Affine(node.scale, node.shift, walk(node.child))
        else:
            raise PolyError(f"cannot substitute into {type(node).__name__}")
        done[key] = out
        return out

    return walk(p)


def exact_multilinear(f) -> MultilinearPoly:
    """The unique multilinear polynomial agreeing with f on {0,1}^n (Moebius transform)."""
    n = f.n
    if n > MAX_TABLE_ARITY:
        raise PolyError(f"exact representation is limited to n <= {MAX_TABLE_ARITY}")
    a = np.asarray(f.table, dtype=np.int64).copy()
    for i in range(n):
        view = a.reshape(-1, 2, 2**i)
        view[:, 1, :] -= view[:, 0, :]
    terms = {}
    for mask in np.flatnonzero(a):
        mono = tuple(i for i in range(n) if (int(mask) >> i) & 1)
        terms[mono] = int(a[mask])
    return MultilinearPoly(n, terms)


def expand_boolean(expr: PolyExpr, cap: int = DEFAULT_TERM_CAP) -> MultilinearPoly:
    """Multilinear form of ``expr`` that agrees with it on 0/1 points.

    Only meant for small expressions; raises PolyTooLarge past ``cap`` terms.
    """
    n = expr.nvars
    done: dict[int, MultilinearPoly] = {}

    def walk(node: PolyExpr) -> MultilinearPoly:
        key = id(node)
        if key in done:
            return done[key]
        if isinstance(node, Var):
            out = MultilinearPoly.variable(n, node.index)
        elif isinstance(node, Const):
            out = MultilinearPoly.constant(n, node.value)
        elif isinstance(node, MultilinearPoly):
            out = MultilinearPoly(n, node.terms)
        elif isinstance(node, Compose):
            kids = [walk(c) for c in node.children]
            out = MultilinearPoly(n)
            for mono, coef in node.outer.terms.items():
                term = MultilinearPoly.constant(n, coef)
                for v in mono:
                    term = term.boolean_product(kids[v], cap)
                out = out + term
                if len(out.terms) > cap:
                    raise PolyTooLarge(f"expansion exceeded {cap} terms")
        elif isinstance(node, UniApply):
            child = walk(node.child)
            out = MultilinearPoly(n)
            for c in reversed(node.poly.coeffs):
                out = out.boolean_product(child, cap).shift(c)
        elif isinstance(node, Affine):
            out = walk(node.child).scale(node.scale).shift(node.shift)
        else:
            raise PolyError(f"cannot expand {type(node).__name__}")
        done[key] = out
        return out

    return walk(expr)


@dataclass(frozen=True)
class CopyLayout:
    """Variable layout for n bits with m copies each: y_{i,j} is variable i*m + j."""

    n: int
    m: int

    @property
    def nvars(self) -> int:
        return self.n * self.m

    def index(self, i: int, j: int) -> int:
        return i * self.m + j

    def bit_of(self, v: int) -> int:
        return v // self.m


def expectation_substitution(p: MultilinearPoly, z: Sequence, layout: CopyLayout):
    """Replace every y_{i,j} in p by z_i.

    Because p is multilinear this equals E[p(y)] for independent bits with
    E[y_{i,j}] = z_i.
    """
    if not isinstance(p, MultilinearPoly):
        raise PolyError("expectation substitution needs a multilinear polynomial")
    if p.nvars != layout.nvars:
        raise PolyError(f"polynomial has {p.nvars} variables, layout declares {layout.nvars}")
    if _nvars_of(z) != layout.n:
        raise PolyError(f"point has {_nvars_of(z)} coordinates, layout has {layout.n} bits")
    lifted = [_col(z, layout.bit_of(v)) for v in range(layout.nvars)]
    if isinstance(z, np.ndarray):
        return _batch_eval(p, lifted, z.shape[:-1])
    return p.eval_at(lifted)


def expectation_polynomial(p: MultilinearPoly, layout: CopyLayout) -> PolyExpr:
    """q(z) = p with y_{i,j} -> z_i, as an expression over n variables."""
    if not isinstance(p, MultilinearPoly):
        raise PolyError("expectation substitution needs a multilinear polynomial")
    if p.nvars != layout.nvars:
        raise PolyError(f"polynomial has {p.nvars} variables, layout declares {layout.nvars}")
    leaves = [Var(i, layout.n) for i in range(layout.n)]
    return Compose(p, tuple(leaves[layout.bit_of(v)] for v in range(layout.nvars)))


# -- plain-text term lists -------------------------------------------------

_TERM_RE = re.compile(r"^\s*([^*\s]+)\s*(?:\*\s*(.+))?$")


def _fmt_coef(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return repr(c) if isinstance(c, float) else str(c)


def to_text(p: MultilinearPoly) -> str:
    """One term per line: ``coeff * x3*x7``; a bare ``coeff`` is the constant."""
    lines = []
    for mono in sorted(p.terms, key=lambda m: (len(m), m)):
        c = _fmt_coef(p.terms[mono])
        lines.append(c if not mono else f"{c} * " + "*".join(f"x{v}" for v in mono))
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_coef(text: str):
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def from_text(text: str, nvars: int | None = None) -> MultilinearPoly:
    terms: dict[tuple[int, ...], object] = {}
    top = -1
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _TERM_RE.match(line)
        if not m:
            raise PolyError(f"cannot parse term {raw!r}")
        coef = _parse_coef(m.group(1))
        mono: tuple[int, ...] = ()
        if m.group(2):
            vars_ = []
            for tok in m.group(2).split("*"):
                tok = tok.strip()
                if not re.fullmatch(r"x\d+", tok):
                    raise PolyError(f"bad variable {tok!r} in {raw!r}")
                vars_.append(int(tok[1:]))
            if len(set(vars_)) != len(vars_):
                raise PolyError(f"repeated variable in {raw!r}")
            mono = tuple(sorted(vars_))
            top = max(top, mono[-1])
        terms[mono] = terms.get(mono, 0) + coef
    if nvars is None:
        nvars = top + 1
    return MultilinearPoly(max(nvars, 1), terms)
