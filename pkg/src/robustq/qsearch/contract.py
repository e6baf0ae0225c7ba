"""RobustFind consumed as a contract.

The backend charges a deterministic cost and then samples an outcome that
honours the miss bound delta (above the weight threshold) and the wrong-index
bound gamma, using the exact string w the view is close to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

MODES = ("interpolating", "adversarial")


@dataclass(frozen=True)
class RobustFindParams:
    eps: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self):
        if not 0 <= self.eps < 0.5:
            raise ValueError(f"eps must lie in [0, 1/2), got {self.eps}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        for name in ("gamma", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


@dataclass(frozen=True)
class RobustFindOutcome:
    index: int | None
    cost_charged: int

    @property
    def found(self) -> bool:
        return self.index is not None


@lru_cache(maxsize=4096)
def _cost(eps: float, beta: float, gamma: float, delta: float, c: float) -> int:
    raw = c / (0.5 - eps) ** 2 * math.sqrt(1 / beta) * math.log(1 / (gamma * delta))
    return max(1, math.ceil(raw))


def robust_find_cost(params: RobustFindParams, cost_constant: float = 1.0) -> int:
    """ceil(C (1/2 - eps)^-2 sqrt(1/beta) ln(1/(gamma delta)))."""
    return _cost(params.eps, params.beta, params.gamma, params.delta, cost_constant)


def robust_find_contract(view, params: RobustFindParams, rng, mode: str = "interpolating",
                         cost_constant: float = 1.0) -> RobustFindOutcome:
    """One RobustFind call against an OracleView.

    Below the threshold |w| < beta n the interpolating mode finds something
    with probability (1 - delta) |w| / (beta n); the adversarial mode always
    returns None there. With |w| = 0 both modes return a (necessarily wrong)
    index with probability gamma.
    """
    if mode not in MODES:
        raise ValueError(f"unknown contract mode {mode!r}")
    cost = robust_find_cost(params, cost_constant)
    view.ledger.charge(cost)
    part = view._target
    n, k = view.n, part.k
    u = rng.random
    if k == 0:
        return RobustFindOutcome(part.sample_zero(u()) if u() < params.gamma else None, cost)
    threshold = params.beta * n
    if k >= threshold:
        hit = 1 - params.delta
    elif mode == "interpolating":
        hit = (1 - params.delta) * k / threshold
    else:
        hit = 0.0
    if u() >= hit:
        return RobustFindOutcome(None, cost)
    if k < n and u() < params.gamma:
        return RobustFindOutcome(part.sample_zero(u()), cost)
    return RobustFindOutcome(part.sample_one(u()), cost)
