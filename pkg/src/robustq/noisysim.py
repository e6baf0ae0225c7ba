"""Noisy-input oracle models, the views A(x~) / A^S(x~) and query accounting.

The ground truth held by a NoisyOracleSet is harness-side state: algorithm
code only invokes oracles, flips view masks and calls RobustFind backends.
"""
from __future__ import annotations

import math
from collections import Counter
from contextlib import contextmanager
from typing import Sequence

import numpy as np


class QueryLedger:
    """Counts oracle invocations, split by phase label and by real/forced.

    ``unit_cost`` converts invocations into underlying queries, e.g. when each
    oracle is itself a repeated T-query subroutine.
    """

    def __init__(self, unit_cost: int = 1):
        self.unit_cost = unit_cost
        self.invocations = 0
        self.real = 0
        self.forced = 0
        self.by_phase: Counter = Counter()
        self._stack: list[str] = []

    @property
    def current_phase(self) -> str:
        return "/".join(self._stack) if self._stack else "default"

    @property
    def queries(self) -> int:
        return self.invocations * self.unit_cost

    @contextmanager
    def phase(self, label: str):
        self._stack.append(label)
        try:
            yield self
        finally:
            self._stack.pop()

    def charge(self, count: int = 1, forced: bool = False) -> None:
        if count < 0:
            raise ValueError("cannot charge a negative count")
        self.invocations += count
        self.by_phase[self.current_phase] += count
        if forced:
            self.forced += count
        else:
            self.real += count

    def snapshot_and_reset(self) -> dict:
        snap = {"total": self.invocations, "real": self.real, "forced": self.forced,
                "by_phase": dict(self.by_phase)}
        self.invocations = self.real = self.forced = 0
        self.by_phase = Counter()
        return snap


class CopyMatrix:
    """n x m noisy copies, drawn once and read consistently afterwards."""

    def __init__(self, y):
        y = np.asarray(y, dtype=np.uint8)
        if y.ndim != 2:
            raise ValueError("copy matrix must be two-dimensional")
        y.setflags(write=False)
        self.y = y

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def m(self) -> int:
        return self.y.shape[1]

    def row_means(self) -> np.ndarray:
        return self.y.mean(axis=1)

    def to_hex_rows(self) -> str:
        lines = []
        for row in self.y:
            value = sum(int(b) << j for j, b in enumerate(row))
            lines.append(f"{value:0{max(1, (self.m + 3) // 4)}x}")
        return f"{self.n} {self.m}\n" + "\n".join(lines) + "\n"

    @classmethod
    def from_hex_rows(cls, text: str) -> "CopyMatrix":
        header, *rows = [ln for ln in text.splitlines() if ln.strip()]
        n, m = map(int, header.split())
        if len(rows) != n:
            raise ValueError(f"expected {n} rows, found {len(rows)}")
        y = [[(int(r, 16) >> j) & 1 for j in range(m)] for r in rows]
        return cls(y)


class NoisyOracleSet:
    """n subroutines A_i; A_i outputs x_i with probability 1 - eps_i.

    mode ``bernoulli``: independent errors at exactly eps_i per invocation.
    mode ``copies``: invocation i reads y[i, J] for a fresh uniform column J.
    """

    def __init__(self, hidden_x, eps, mode: str = "bernoulli", copies: CopyMatrix | None = None,
                 ledger: QueryLedger | None = None):
        x = np.asarray(hidden_x, dtype=np.uint8).copy()
        x.setflags(write=False)
        self._x = x
        if mode not in ("bernoulli", "copies"):
            raise ValueError(f"unknown oracle mode {mode!r}")
        if mode == "copies" and (copies is None or copies.n != x.size):
            raise ValueError("copies mode needs a copy matrix with one row per bit")
        eps_bits = np.broadcast_to(np.asarray(eps, dtype=float), x.shape).copy()
        if np.any(eps_bits < 0) or np.any(eps_bits >= 0.5):
            raise ValueError("per-bit error must lie in [0, 1/2)")
        self.eps_bits = eps_bits
        self.eps = float(eps_bits.max()) if x.size else 0.0
        self.mode = mode
        self.copies = copies
        self.ledger = ledger if ledger is not None else QueryLedger()

    @property
    def n(self) -> int:
        return self._x.size

    def _check(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"oracle index {i} out of range 0..{self.n - 1}")

    def _read(self, i: int, rng: np.random.Generator) -> int:
        if self.mode == "copies":
            return int(self.copies.y[i, int(rng.random() * self.copies.m)])
        return int(self._x[i]) ^ int(rng.random() < self.eps_bits[i])

    def invoke(self, i: int, rng: np.random.Generator) -> int:
        self._check(i)
        self.ledger.charge(1)
        return self._read(i, rng)

    def invoke_many(self, indices: Sequence[int], rng: np.random.Generator) -> np.ndarray:
        idx = np.asarray(indices, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise IndexError("oracle index out of range")
        self.ledger.charge(int(idx.size))
        if self.mode == "copies":
            cols = (rng.random(idx.size) * self.copies.m).astype(np.int64)
            return self.copies.y[idx, cols].astype(np.uint8)
        flips = rng.random(idx.size) < self.eps_bits[idx]
        return (self._x[idx] ^ flips).astype(np.uint8)

    def effective_bits(self) -> np.ndarray:
        """The string this set is actually close to (harness/contract use only)."""
        if self.mode == "copies":
            means = self.copies.row_means()
            eff = (means > 0.5).astype(np.uint8)
            ties = means == 0.5
            eff[ties] = self._x[ties]
            return eff
        return self._x

    def ground_truth(self) -> np.ndarray:
        """Hidden input, for scoring by the harness."""
        return self._x

    def negated(self) -> "NoisyOracleSet":
        """Same subroutines with every answer negated; shares the ledger."""
        copies = CopyMatrix(1 - self.copies.y) if self.copies is not None else None
        return NoisyOracleSet(1 - self._x, self.eps_bits, self.mode, copies, self.ledger)


def copies_count(n: int, eps: float, c: float = 1.0) -> int:
    """m = ceil(c ln(100 n) / eps^2)."""
    return max(1, math.ceil(c * math.log(100 * n) / eps**2))


def copies_oracle(x, eps: float, rng: np.random.Generator, c: float = 1.0, m: int | None = None,
                  ledger: QueryLedger | None = None) -> NoisyOracleSet:
    """Multiple-noisy-copies model wrapped as subroutines.

    Reading a uniformly random column reproduces measuring the uniform
    superposition over copies. Off the (>= 99/100) event that every row
    average is within 2 eps of x_i, the set may be further from x.
    """
    x = np.asarray(x, dtype=np.uint8)
    if m is None:
        if not 0 < eps < 0.25:
            raise ValueError("copies model needs eps in (0, 1/4)")
        m = copies_count(x.size, eps, c)
    flips = rng.random((x.size, m)) < eps
    y = CopyMatrix(x[:, None] ^ flips)
    disagreement = (y.y != x[:, None]).mean(axis=1)
    return NoisyOracleSet(x, np.minimum(disagreement, 0.499999), "copies", y, ledger)


class _Partition:
    """Indices split into ones and zeros of a bit string with O(1) toggles and
    uniform sampling from either side. ``order[:k]`` holds the ones."""

    def __init__(self, bits: np.ndarray):
        ones = np.flatnonzero(bits)
        zeros = np.flatnonzero(bits == 0)
        self.order = np.concatenate([ones, zeros]).tolist()
        self.pos = [0] * len(self.order)
        for p, i in enumerate(self.order):
            self.pos[i] = p
        self.k = len(ones)

    def _swap(self, a: int, b: int) -> None:
        order, pos = self.order, self.pos
        ia, ib = order[a], order[b]
        order[a], order[b] = ib, ia
        pos[ia], pos[ib] = b, a

    def toggle(self, i: int) -> None:
        p = self.pos[i]
        if p < self.k:
            self._swap(p, self.k - 1)
            self.k -= 1
        else:
            self._swap(p, self.k)
            self.k += 1

    def sample_one(self, u: float) -> int:
        return self.order[int(u * self.k)]

    def sample_zero(self, u: float) -> int:
        return self.order[self.k + int(u * (len(self.order) - self.k))]


class OracleView:
    """A^S(x~): answers of A_i negated where x~_i = 1, forced to 0 outside S.

    The view is mutable: ``flip(i)`` toggles x~_i, which is how the recovery
    algorithm updates its estimate between searches.
    """

    def __init__(self, base: NoisyOracleSet, flip_mask=None, support=None):
        self.base = base
        n = base.n
        self.flip_mask = np.zeros(n, dtype=np.uint8) if flip_mask is None else np.asarray(flip_mask, dtype=np.uint8).copy()
        if self.flip_mask.size != n:
            raise ValueError("flip mask length differs from the oracle count")
        self.in_support = np.ones(n, dtype=bool)
        if support is not None:
            self.in_support[:] = False
            self.in_support[np.asarray(support, dtype=np.int64)] = True
        self._target = _Partition(self._target_bits())

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def ledger(self) -> QueryLedger:
        return self.base.ledger

    @property
    def eps(self) -> float:
        return self.base.eps

    def _target_bits(self) -> np.ndarray:
        return (self.base.effective_bits() ^ self.flip_mask) & self.in_support

    def invoke(self, i: int, rng: np.random.Generator) -> int:
        self.base._check(i)
        if not self.in_support[i]:
            self.ledger.charge(1, forced=True)
            return 0
        return self.base.invoke(i, rng) ^ int(self.flip_mask[i])

    def flip(self, i: int) -> None:
        self.flip_mask[i] ^= 1
        if self.in_support[i]:
            self._target.toggle(i)

    def target_weight(self) -> int:
        """|w| for the string w this view is close to (contract backend only)."""
        return self._target.k
