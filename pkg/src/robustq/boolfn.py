"""Boolean functions as truth tables, certificate complexity and the
symmetric-function gap parameter.

Index convention everywhere in the package: bit ``i`` of a truth-table index
is the input bit ``x_i`` (little-endian).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

MAX_TABLE_ARITY = 20


class BooleanFunctionError(ValueError):
    pass


def index_of(x: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(x))


def bits_of(index: int, n: int) -> np.ndarray:
    return np.array([(index >> i) & 1 for i in range(n)], dtype=np.uint8)


def all_inputs(n: int) -> np.ndarray:
    """All 2**n inputs as rows, row ``k`` being the bits of index ``k``."""
    idx = np.arange(2**n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)) & 1).astype(np.uint8)


@dataclass(frozen=True)
class BooleanFunction:
    n: int
    table: np.ndarray = field(repr=False)
    name: str = "custom"

    def __post_init__(self):
        if self.n < 1:
            raise BooleanFunctionError("arity must be at least 1")
        table = np.asarray(self.table, dtype=np.uint8).reshape(-1)
        if table.size != 2**self.n:
            raise BooleanFunctionError(f"table has {table.size} entries, expected {2**self.n}")
        if np.any(table > 1):
            raise BooleanFunctionError("table entries must be bits")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @classmethod
    def from_callable(cls, n: int, fn: Callable[[np.ndarray], int], name: str = "custom"):
        if n > MAX_TABLE_ARITY:
            raise BooleanFunctionError(f"truth tables are limited to n <= {MAX_TABLE_ARITY}")
        return cls(n, [int(fn(x)) & 1 for x in all_inputs(n)], name)

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            raise BooleanFunctionError(f"input has {len(x)} bits, function arity is {self.n}")
        return int(self.table[index_of(x)])

    def cube(self) -> np.ndarray:
        """Table as an n-dimensional array with axis ``i`` holding ``x_i``."""
        return self.table.reshape((2,) * self.n).T

    def weight_profile(self) -> np.ndarray | None:
        """Value per Hamming weight, or None if the function is not symmetric."""
        weights = all_inputs(self.n).sum(axis=1)
        profile = np.full(self.n + 1, -1, dtype=np.int8)
        for w, v in zip(weights, self.table):
            if profile[w] == -1:
                profile[w] = v
            elif profile[w] != v:
                return None
        return profile.astype(np.uint8)

    @property
    def is_symmetric(self) -> bool:
        return self.weight_profile() is not None

    def to_hex(self) -> str:
        return table_to_hex(self.table)

    @classmethod
    def from_hex(cls, n: int, text: str, name: str = "custom"):
        return cls(n, hex_to_table(n, text), name)


@dataclass(frozen=True)
class SymmetricFunction:
    """A symmetric function stored by its weight profile.

    Works for arities far beyond what a truth table can hold; the table is
    materialised on demand for n <= 20.
    """

    n: int
    profile: tuple[int, ...]
    name: str = "symmetric"

    def __post_init__(self):
        if self.n < 1:
            raise BooleanFunctionError("arity must be at least 1")
        if len(self.profile) != self.n + 1:
            raise BooleanFunctionError("profile needs one value per weight 0..n")
        object.__setattr__(self, "profile", tuple(int(v) & 1 for v in self.profile))

    def __call__(self, x: Sequence[int]) -> int:
        if len(x) != self.n:
            raise BooleanFunctionError(f"input has {len(x)} bits, function arity is {self.n}")
        return self.profile[int(np.sum(x))]

    def value_at_weight(self, w: int) -> int:
        return self.profile[w]

    def weight_profile(self) -> np.ndarray:
        return np.array(self.profile, dtype=np.uint8)

    is_symmetric = True

    @property
    def table(self) -> np.ndarray:
        if self.n > MAX_TABLE_ARITY:
            raise BooleanFunctionError(f"truth tables are limited to n <= {MAX_TABLE_ARITY}")
        weights = all_inputs(self.n).sum(axis=1)
        return np.array(self.profile, dtype=np.uint8)[weights]

    def as_table(self) -> BooleanFunction:
        return BooleanFunction(self.n, self.table, self.name)

    def cube(self) -> np.ndarray:
        return self.as_table().cube()

    def to_hex(self) -> str:
        return table_to_hex(self.table)


def table_to_hex(table: np.ndarray) -> str:
    value = sum(int(b) << i for i, b in enumerate(table))
    width = max(1, (len(table) + 3) // 4)
    return f"{value:0{width}x}"


def hex_to_table(n: int, text: str) -> np.ndarray:
    value = int(text, 16)
    if value >> (2**n):
        raise BooleanFunctionError("hex string has more bits than the table")
    return np.array([(value >> i) & 1 for i in range(2**n)], dtype=np.uint8)


def make_named(name: str, n: int) -> SymmetricFunction | BooleanFunction:
    """Build one of the named families.

    Names: ``parity``, ``or``, ``and``, ``majority`` (odd n), ``threshold_k``
    (1 iff weight >= k), ``constant_b`` and ``dictator`` (f(x) = x_0).
    """
    if n < 1:
        raise BooleanFunctionError("arity must be at least 1")
    key = name.lower()
    if key == "dictator":
        if n > MAX_TABLE_ARITY:
            raise BooleanFunctionError("dictator is only built as a truth table")
        return BooleanFunction.from_callable(n, lambda x: x[0], "dictator")
    weights = range(n + 1)
    if key == "parity":
        profile = [w % 2 for w in weights]
    elif key == "or":
        profile = [int(w > 0) for w in weights]
    elif key == "and":
        profile = [int(w == n) for w in weights]
    elif key == "majority":
        if n % 2 == 0:
            raise BooleanFunctionError("majority needs odd n")
        profile = [int(w > n // 2) for w in weights]
    elif key.startswith("threshold_"):
        k = int(key.split("_", 1)[1])
        if not 0 <= k <= n:
            raise BooleanFunctionError(f"threshold must be in [0, {n}]")
        profile = [int(w >= k) for w in weights]
    elif key.startswith("constant_"):
        b = int(key.split("_", 1)[1])
        if b not in (0, 1):
            raise BooleanFunctionError("constant must be 0 or 1")
        profile = [b] * (n + 1)
    else:
        raise BooleanFunctionError(f"unknown function family {name!r}")
    return SymmetricFunction(n, tuple(profile), key)


@dataclass(frozen=True)
class Certificate:
    assignment: Mapping[int, int]
    value: int

    @property
    def size(self) -> int:
        return len(self.assignment)

    def consistent_with(self, x: Sequence[int]) -> bool:
        return all(int(x[i]) == b for i, b in self.assignment.items())

    def holds_for(self, f) -> bool:
        """Exhaustive check: every input consistent with the assignment maps to value."""
        cube = f.cube()
        sl = tuple(self.assignment.get(i, slice(None)) for i in range(f.n))
        return bool(np.all(cube[sl] == self.value))


def certificate_complexity(f, x: Sequence[int]) -> tuple[int, Certificate]:
    """Smallest f(x)-certificate consistent with x (C_x(f)) and a witness."""
    if len(x) != f.n:
        raise BooleanFunctionError(f"input has {len(x)} bits, function arity is {f.n}")
    if f.n > MAX_TABLE_ARITY:
        raise BooleanFunctionError(f"certificate search is limited to n <= {MAX_TABLE_ARITY}")
    cube = f.cube()
    x = [int(b) for b in x]
    value = int(cube[tuple(x)])
    for size in range(f.n + 1):
        for subset in itertools.combinations(range(f.n), size):
            fixed = set(subset)
            sl = tuple(x[i] if i in fixed else slice(None) for i in range(f.n))
            if np.all(cube[sl] == value):
                return size, Certificate({i: x[i] for i in subset}, value)
    raise AssertionError("the full assignment is always a certificate")


def max_certificate_complexity(f) -> int:
    """C(f) = max over x of C_x(f)."""
    return max(certificate_complexity(f, x)[0] for x in all_inputs(f.n))


def gamma(f) -> int:
    """min |2k - n + 1| over the weights k where f changes value going to k+1."""
    profile = f.weight_profile()
    if profile is None:
        raise BooleanFunctionError("gamma is only defined for symmetric functions")
    n = f.n
    changes = [k for k in range(n) if profile[k] != profile[k + 1]]
    if not changes:
        raise BooleanFunctionError("gamma is undefined for constant functions")
    return min(abs(2 * k - n + 1) for k in changes)


def hamming_weight(x) -> int:
    return int(np.sum(x))
