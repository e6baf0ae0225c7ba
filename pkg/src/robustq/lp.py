"""Feasibility of {A c <= b} with c free.

Small systems are decided by an exact-rational Phase-I simplex with Bland's
rule. Large systems use constraint generation around the same exact solver,
and systems beyond EXACT_ROW_LIMIT fall back to HiGHS in floating point.
Every verdict is checked independently before it is returned: a feasible
witness by direct evaluation of all constraints, an infeasible verdict by a
Farkas certificate y >= 0 with y^T A = 0 and y^T b < 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

EXACT_ROW_LIMIT = 10_000
FLOAT_TOLERANCE = 1e-9
ACTIVE_SET_THRESHOLD = 300
MAX_PIVOTS = 200_000


class LPError(RuntimeError):
    """Solver failure, kept distinct from an infeasible verdict."""


@dataclass
class LPResult:
    feasible: bool
    witness: list | None
    farkas: list | None
    exact: bool
    rows: int
    pivots: int = 0
    tolerance: float = 0.0


def _to_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def phase_one(A: list[list[Fraction]], b: list[Fraction]) -> tuple[list[Fraction] | None, int]:
    """Find x >= 0 with A x = b (exact), or None if there is none.

    Dense tableau with one artificial per row; Bland's rule guards against
    cycling.
    """
    m = len(A)
    ncols = len(A[0]) if m else 0
    rows = []
    for i in range(m):
        sign = -1 if b[i] < 0 else 1
        row = [sign * a for a in A[i]] + [Fraction(0)] * m + [sign * b[i]]
        row[ncols + i] = Fraction(1)
        rows.append(row)
    width = ncols + m
    # reduced costs of "minimise the sum of artificials"
    obj = [Fraction(0)] * (width + 1)
    for row in rows:
        for j in range(ncols):
            if row[j]:
                obj[j] -= row[j]
        obj[width] -= row[width]
    basis = [ncols + i for i in range(m)]
    pivots = 0
    while True:
        enter = next((j for j in range(width) if obj[j] < 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][width] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise LPError("phase one objective unbounded; cannot happen for a bounded-below sum")
        _pivot(rows, obj, leave, enter)
        basis[leave] = enter
        pivots += 1
        if pivots > MAX_PIVOTS:
            raise LPError("pivot limit exceeded")
    if obj[width] != 0:
        return None, pivots
    x = [Fraction(0)] * ncols
    for i, j in enumerate(basis):
        if j < ncols:
            x[j] = rows[i][width]
    return x, pivots


def _pivot(rows, obj, r, c):
    prow = rows[r]
    piv = prow[c]
    if piv != 1:
        prow[:] = [v / piv for v in prow]
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(rows):
        if i != r and row[c]:
            f = row[c]
            for j in nz:
                row[j] -= f * prow[j]
    if obj[c]:
        f = obj[c]
        for j in nz:
            obj[j] -= f * prow[j]


def _residuals(A, b, c):
    return [bi - sum(a * x for a, x in zip(row, c)) for row, bi in zip(A, b)]


def verify_witness(A, b, c) -> bool:
    return all(r >= 0 for r in _residuals(A, b, c))


def verify_farkas(A, b, y) -> bool:
    if any(v < 0 for v in y):
        return False
    k = len(A[0]) if A else 0
    for j in range(k):
        if sum(yi * row[j] for yi, row in zip(y, A) if yi) != 0:
            return False
    return sum(yi * bi for yi, bi in zip(y, b) if yi) < 0


def _exact_small(A, b) -> LPResult:
    m = len(A)
    k = len(A[0]) if m else 0
    # c = u - v, slack s >= 0:  A u - A v + s = b
    std = [row + [-a for a in row] + [Fraction(int(i == r)) for i in range(m)] for r, row in enumerate(A)]
    x, pivots = phase_one(std, b)
    if x is not None:
        c = [x[j] - x[k + j] for j in range(k)]
        if not verify_witness(A, b, c):
            raise LPError("exact witness failed re-verification")
        return LPResult(True, c, None, True, m, pivots)
    # Farkas system: A^T y = 0, b^T y = -1, y >= 0
    fa = [[A[i][j] for i in range(m)] for j in range(k)] + [list(b)]
    fb = [Fraction(0)] * k + [Fraction(-1)]
    y, more = phase_one(fa, fb)
    if y is None or not verify_farkas(A, b, y):
        raise LPError("primal and Farkas systems both infeasible; inconsistent solve")
    return LPResult(False, None, y, True, m, pivots + more)


def _exact_active_set(A, b) -> LPResult:
    m = len(A)
    k = len(A[0])
    active = list(range(min(m, max(2 * k, 16))))
    pivots = 0
    while True:
        sub = _exact_small([A[i] for i in active], [b[i] for i in active])
        pivots += sub.pivots
        if not sub.feasible:
            y = [Fraction(0)] * m
            for i, v in zip(active, sub.farkas):
                y[i] = v
            return LPResult(False, None, y, True, m, pivots)
        res = _residuals(A, b, sub.witness)
        chosen = set(active)
        violated = sorted((r, i) for i, r in enumerate(res) if r < 0 and i not in chosen)
        if not violated:
            return LPResult(True, sub.witness, None, True, m, pivots)
        active.extend(i for _, i in violated[: max(k, 8)])


def _float_fallback(A, b) -> LPResult:
    from scipy.optimize import linprog

    Af = np.array([[float(v) for v in row] for row in A])
    bf = np.array([float(v) for v in b])
    k = Af.shape[1]
    res = linprog(np.zeros(k), A_ub=Af, b_ub=bf, bounds=[(None, None)] * k, method="highs")
    if res.status == 0:
        c = res.x
        if np.all(Af @ c <= bf + FLOAT_TOLERANCE):
            return LPResult(True, [float(v) for v in c], None, False, len(A), tolerance=FLOAT_TOLERANCE)
        raise LPError("float witness violates constraints beyond tolerance")
    if res.status == 2:
        return LPResult(False, None, None, False, len(A), tolerance=FLOAT_TOLERANCE)
    raise LPError(f"HiGHS failed: {res.message}")


def lp_feasibility(A: Sequence[Sequence], b: Sequence) -> LPResult:
    """Decide whether some c satisfies A c <= b."""
    if len(A) != len(b):
        raise ValueError("constraint matrix and bounds disagree on the row count")
    if not A:
        return LPResult(True, [], None, True, 0)
    widths = {len(row) for row in A}
    if len(widths) != 1:
        raise ValueError("constraint rows have different lengths")
    if len(A) >= EXACT_ROW_LIMIT:
        return _float_fallback(A, b)
    Aq = [[_to_fraction(v) for v in row] for row in A]
    bq = [_to_fraction(v) for v in b]
    if len(Aq) > ACTIVE_SET_THRESHOLD:
        return _exact_active_set(Aq, bq)
    return _exact_small(Aq, bq)
