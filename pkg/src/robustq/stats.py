"""Confidence intervals and log-log scaling fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats


def wilson_ci(successes: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("Wilson interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    z = float(stats.norm.ppf(0.5 + level / 2))
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return float(max(0.0, center - half)), float(min(1.0, center + half))


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    stderr: float
    r_squared: float
    intercept: float

    def as_dict(self) -> dict:
        return {"slope": self.slope, "stderr": self.stderr, "r2": self.r_squared, "intercept": self.intercept}


def fit_exponent(points: Sequence[tuple[float, float]]) -> ExponentFit:
    """Ordinary least squares of log(cost) on log(size)."""
    if len(points) < 3:
        raise ValueError("need at least 3 points for an exponent fit")
    sizes = np.array([p[0] for p in points], dtype=float)
    costs = np.array([p[1] for p in points], dtype=float)
    if np.any(sizes <= 0) or np.any(costs <= 0):
        raise ValueError("sizes and costs must be positive")
    if np.unique(sizes).size < 2:
        raise ValueError("degenerate fit: all sizes are equal")
    res = stats.linregress(np.log(sizes), np.log(costs))
    return ExponentFit(float(res.slope), float(res.stderr), float(res.rvalue**2), float(res.intercept))


def binom_tail_above_half(r: int, p: float) -> float:
    """P[Bin(r, p) > r/2]; ties (even r) count as half a failure."""
    tail = stats.binom.sf(r // 2, r, p)
    if r % 2 == 0:
        tail += 0.5 * stats.binom.pmf(r // 2, r, p)
    return float(tail)
