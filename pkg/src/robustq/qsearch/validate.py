"""Compare the contract backend against a statevector one-shot finder."""
from __future__ import annotations

import math

import numpy as np

from ..noisysim import NoisyOracleSet, OracleView
from ..stats import binom_tail_above_half, wilson_ci
from .contract import RobustFindParams, robust_find_contract
from .statevector import grover_robust


def statevector_finder_law(x, eps: float, r: int, verify_reads: int, attempts: int) -> tuple[np.ndarray, float]:
    """Exact output law of: up to `attempts` rounds of Grover + majority-verified index.

    Returns (P[return i] per index, P[return None]).
    """
    x = np.asarray(x, dtype=np.uint8)
    dist = grover_robust(x, eps, r).distribution
    wrong = binom_tail_above_half(verify_reads, eps)
    accept = np.where(x == 1, 1 - wrong, wrong) * dist
    reject = 1 - accept.sum()
    # geometric over attempts
    reach = (1 - reject**attempts) / (1 - reject) if reject < 1 else attempts
    return accept * reach, reject**attempts


def _rates(found: int, correct: int, trials: int) -> dict:
    miss = trials - found
    return {
        "trials": trials,
        "miss_rate": miss / trials,
        "miss_ci": wilson_ci(miss, trials),
        "wrong_rate": (found - correct) / found if found else 0.0,
        "wrong_ci": wilson_ci(found - correct, found) if found else (0.0, 1.0),
    }


def cross_validate_backends(x, eps: float, params: RobustFindParams, trials: int, rng: np.random.Generator,
                            r: int = 9, verify_reads: int = 9, attempts: int | None = None) -> dict:
    """Empirical (miss, wrong-index) rates for both backends on the same x.

    The statevector finder runs Grover, measures an index, verifies it with a
    majority of `verify_reads` noisy reads and retries on rejection.
    """
    x = np.asarray(x, dtype=np.uint8)
    n = x.size
    if n > 16:
        raise ValueError("cross validation is limited to n <= 16")
    if attempts is None:
        attempts = max(1, math.ceil(math.log2(1 / params.delta)))
    weight = int(x.sum())
    above = weight >= params.beta * n

    per_index, none_prob = statevector_finder_law(x, eps, r, verify_reads, attempts) if weight else (None, 1.0)
    if weight:
        outcomes = rng.choice(n + 1, size=trials, p=np.append(per_index, none_prob) / (per_index.sum() + none_prob))
        found_mask = outcomes < n
        found = int(found_mask.sum())
        correct = int(x[outcomes[found_mask]].sum())
    else:
        found = correct = 0
    sv = _rates(found, correct, trials)

    oracles = NoisyOracleSet(x, eps)
    view = OracleView(oracles)
    found = correct = 0
    for _ in range(trials):
        out = robust_find_contract(view, params, rng)
        if out.index is not None:
            found += 1
            correct += int(x[out.index])
    ct = _rates(found, correct, trials)

    def satisfied(rates):
        miss_ok = (not above) or rates["miss_ci"][0] <= params.delta
        return bool(miss_ok and rates["wrong_ci"][0] <= params.gamma)

    return {
        "n": n, "weight": weight, "eps": eps, "above_threshold": above,
        "statevector": sv | {"satisfies": satisfied(sv), "exact_miss": float(none_prob)},
        "contract": ct | {"satisfies": satisfied(ct)},
    }
