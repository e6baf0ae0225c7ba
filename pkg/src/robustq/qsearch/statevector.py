"""Small-n statevector simulation of Grover search with robustified queries.

Register layout: index (n values) x output qubit x r ancillas, stored as an
array of shape (n, 2, 2, ..., 2). The noisy query for bit i rotates an ancilla
from |0> by angle arcsin(sqrt(eps)) and then applies X when x_i = 1, so a
measurement reads x_i with probability 1 - eps. Garbage registers are fixed
to the all-zero reference state, i.e. not modelled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..stats import binom_tail_above_half

MAX_AMPLITUDES = 1 << 22
NORM_TOLERANCE = 1e-10


class StateBudgetExceeded(MemoryError):
    pass


@dataclass
class StateVector:
    amplitudes: np.ndarray
    layout: tuple[str, ...]

    @classmethod
    def zeros(cls, n: int, r: int) -> "StateVector":
        size = n * 2 ** (r + 1)
        if size > MAX_AMPLITUDES:
            raise StateBudgetExceeded(f"{size} amplitudes exceed the budget of {MAX_AMPLITUDES}")
        amps = np.zeros((n, 2) + (2,) * r, dtype=complex)
        return cls(amps, ("index", "output") + tuple(f"anc{a}" for a in range(r)))

    @property
    def ancillas(self) -> int:
        return self.amplitudes.ndim - 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_norm(self) -> None:
        if abs(self.norm() - 1) > NORM_TOLERANCE:
            raise AssertionError(f"state norm drifted to {self.norm()!r}")

    def index_distribution(self) -> np.ndarray:
        probs = np.abs(self.amplitudes) ** 2
        return probs.reshape(probs.shape[0], -1).sum(axis=1)


def noisy_query_gates(x, eps: float) -> np.ndarray:
    """Per-index 2x2 real matrices X^{x_i} R(theta), sin(theta) = sqrt(eps)."""
    x = np.asarray(x, dtype=np.uint8)
    s, c = math.sqrt(eps), math.sqrt(1 - eps)
    rot = np.array([[c, -s], [s, c]])
    flip = np.array([[0.0, 1.0], [1.0, 0.0]])
    return np.where(x[:, None, None] == 1, flip @ rot, rot)


def _apply_indexed(amps: np.ndarray, gates: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(amps, axis, 1)
    out = np.einsum("ijk,ik...->ij...", gates, moved)
    return np.moveaxis(out, 1, axis)


def _majority_mask(r: int) -> np.ndarray:
    grids = np.indices((2,) * r)
    return grids.sum(axis=0) > r / 2


@dataclass(frozen=True)
class RobustQuery:
    """Description of the robustified oracle for a fixed x."""

    x: np.ndarray
    eps: float
    r: int
    gates: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)

    @property
    def noisy_queries(self) -> int:
        # r forward queries plus r for the uncomputation
        return 2 * self.r

    def apply(self, state: StateVector, check: bool = True) -> None:
        amps = state.amplitudes
        if state.ancillas != self.r:
            raise ValueError("state has a different ancilla count than the query")
        for a in range(self.r):
            amps = _apply_indexed(amps, self.gates, 2 + a)
        # majority of the ancillas flips the output qubit
        amps = np.where(self.mask, amps[:, ::-1], amps)
        inverse = np.transpose(self.gates, (0, 2, 1))
        for a in range(self.r):
            amps = _apply_indexed(amps, inverse, 2 + a)
        state.amplitudes = amps
        if check:
            state.check_norm()

    def distance(self) -> float:
        """Operator-norm distance to the ideal U_x on ancilla-zero inputs."""
        worst = 0.0
        for bit in sorted(set(int(b) for b in self.x)):
            single = robustified_query([bit], self.eps, self.r)
            columns = []
            for out in (0, 1):
                st = StateVector.zeros(1, self.r)
                st.amplitudes[(0, out) + (0,) * self.r] = 1
                single.apply(st)
                ideal = np.zeros_like(st.amplitudes)
                ideal[(0, out ^ bit) + (0,) * self.r] = 1
                columns.append((st.amplitudes - ideal).ravel())
            worst = max(worst, float(np.linalg.norm(np.stack(columns, axis=1), 2)))
        return worst


def robustified_query(x, eps: float, r: int) -> RobustQuery:
    if r < 1 or r % 2 == 0:
        raise ValueError("majority needs an odd number of ancillas")
    if not 0 <= eps < 0.5:
        raise ValueError("eps must lie in [0, 1/2)")
    x = np.asarray(x, dtype=np.uint8)
    if x.size * 2 ** (r + 1) > MAX_AMPLITUDES:
        raise StateBudgetExceeded(f"n={x.size}, r={r} exceeds the statevector budget")
    mask = _majority_mask(r)
    # broadcast the ancilla mask against the output axis once
    return RobustQuery(x, eps, r, noisy_query_gates(x, eps), mask[None, None, ...])


def query_distance(x, eps: float, r: int) -> float:
    return robustified_query(x, eps, r).distance()


def query_distance_closed_form(eps: float, r: int) -> float:
    """2 sqrt(P[majority of r noisy reads is wrong])."""
    return 2 * math.sqrt(binom_tail_above_half(r, eps))


@dataclass
class GroverResult:
    distribution: np.ndarray
    success_probability: float
    iterations: int
    noisy_queries: int
    counts: np.ndarray | None = None
    hits: int = 0
    flagged: str | None = None

    @property
    def empirical_success(self) -> float | None:
        if self.counts is None or not self.counts.sum():
            return None
        return self.hits / int(self.counts.sum())


def grover_iterations(n: int, weight: int) -> int:
    return int(math.floor(math.pi / 4 * math.sqrt(n / weight)))


def closed_form_success(n: int, weight: int, iterations: int | None = None) -> float:
    theta = math.asin(math.sqrt(weight / n))
    j = grover_iterations(n, weight) if iterations is None else iterations
    return math.sin((2 * j + 1) * theta) ** 2


def grover_robust(x, eps: float, r: int, rng: np.random.Generator | None = None, shots: int = 0,
                  iterations: int | None = None) -> GroverResult:
    """Amplitude amplification with the robustified query as a phase oracle."""
    x = np.asarray(x, dtype=np.uint8)
    n = x.size
    if n > 16:
        raise ValueError("statevector runs are limited to n <= 16")
    weight = int(x.sum())
    if weight == 0:
        dist = np.full(n, 1 / n)
        counts = rng.multinomial(shots, dist) if shots and rng is not None else None
        return GroverResult(dist, 0.0, 0, 0, counts, 0, flagged="no marked index; uniform distribution")
    query = robustified_query(x, eps, r)
    state = StateVector.zeros(n, r)
    minus = np.array([1, -1]) / math.sqrt(2)
    state.amplitudes[(slice(None), slice(None)) + (0,) * r] = minus[None, :] / math.sqrt(n)
    j = grover_iterations(n, weight) if iterations is None else iterations
    for _ in range(j):
        query.apply(state)
        amps = state.amplitudes
        state.amplitudes = 2 * amps.mean(axis=0, keepdims=True) - amps
        state.check_norm()
    dist = state.index_distribution()
    success = float(dist[x == 1].sum())
    result = GroverResult(dist, success, j, j * query.noisy_queries)
    if shots:
        if rng is None:
            raise ValueError("sampling shots needs an rng")
        counts = rng.multinomial(shots, dist / dist.sum())
        result.counts = counts
        result.hits = int(counts[x == 1].sum())
    return result
