"""Fibonacci/Lucas numbers, base-g repdigits and exact product checks."""

from __future__ import annotations

import bisect
import enum
import threading
from dataclasses import dataclass

from .certreal import golden_ratio
from .errors import InvalidRepdigit


class SequenceKind(enum.Enum):
    FIBONACCI = "fibonacci"
    LUCAS = "lucas"

    @property
    def seeds(self) -> tuple[int, int]:
        return (0, 1) if self is SequenceKind.FIBONACCI else (2, 1)

    @classmethod
    def parse(cls, text: str) -> "SequenceKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown sequence kind {text!r} (expected fibonacci or lucas)") from None


@dataclass(frozen=True, order=True)
class Repdigit:
    """``digit`` repeated ``length`` times in base ``base``.

    Field order makes the dataclass ordering equal to the canonical
    (length, digit) order within one base.
    """

    length: int
    digit: int
    base: int

    def __post_init__(self) -> None:
        if self.base < 2:
            raise InvalidRepdigit(f"base must be >= 2, got {self.base}")
        if not 1 <= self.digit <= self.base - 1:
            raise InvalidRepdigit(f"digit {self.digit} outside 1..{self.base - 1}")
        if self.length < 1:
            raise InvalidRepdigit(f"length must be >= 1, got {self.length}")

    @property
    def value(self) -> int:
        return repdigit_value(self)

    def to_json(self) -> dict:
        return {"digit": self.digit, "length": self.length, "base": self.base}


@dataclass(frozen=True)
class Solution:
    """One witness: seq_value(kind, k) equals the product of three repdigits."""

    kind: SequenceKind
    k: int
    factors: tuple[Repdigit, Repdigit, Repdigit]
    value: int

    @classmethod
    def from_factors(cls, kind: SequenceKind, k: int, factors) -> "Solution":
        ordered = tuple(sorted(factors))
        value = 1
        for f in ordered:
            value *= f.value
        return cls(kind, k, ordered, value)

    @property
    def base(self) -> int:
        return self.factors[0].base

    @property
    def exponents(self) -> tuple[int, int, int]:
        return tuple(f.length for f in self.factors)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "k": self.k,
            "value": str(self.value),
            "factors": [f.to_json() for f in self.factors],
        }


def repdigit_value(r: Repdigit) -> int:
    if not isinstance(r, Repdigit):
        raise InvalidRepdigit(f"not a repdigit: {r!r}")
    return r.digit * ((r.base ** r.length - 1) // (r.base - 1))


class _Table:
    """Monotonically growing table of sequence values; lookups are lock-free."""

    def __init__(self, kind: SequenceKind):
        self.kind = kind
        self._values: list[int] = list(kind.seeds)
        self._lock = threading.Lock()

    def _extend_to_index(self, k: int) -> None:
        with self._lock:
            vals = self._values
            while len(vals) <= k:
                vals.append(vals[-1] + vals[-2])

    def _extend_to_value(self, n: int) -> None:
        with self._lock:
            vals = self._values
            while vals[-1] < n:
                vals.append(vals[-1] + vals[-2])

    def value(self, k: int) -> int:
        if k >= len(self._values):
            self._extend_to_index(k)
        return self._values[k]

    def index_of(self, n: int) -> int | None:
        if n < 1:
            return None
        if self._values[-1] < n:
            self._extend_to_value(n)
        vals = self._values
        # indices >= 1 are non-decreasing for both kinds; index 0 is excluded
        i = bisect.bisect_left(vals, n, 1)
        if i < len(vals) and vals[i] == n:
            return i
        return None


_TABLES = {kind: _Table(kind) for kind in SequenceKind}


def seq_value(kind: SequenceKind, k: int) -> int:
    if k < 0:
        raise ValueError("negative indices are not supported")
    return _TABLES[kind].value(k)


def seq_membership(n: int, kind: SequenceKind) -> int | None:
    """Smallest k >= 1 with seq_value(kind, k) == n, or None."""
    return _TABLES[kind].index_of(n)


def binet_sandwich_holds(kind: SequenceKind, k: int, prec: int = 128) -> bool:
    """Certified check of alpha^(k-2) <= F_k <= alpha^(k-1) (Lucas: alpha^(k-1) <= L_k <= 2 alpha^k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    prec = max(prec, 2 * k + 64)
    alpha = golden_ratio(prec)
    value = seq_value(kind, k)
    if kind is SequenceKind.FIBONACCI:
        lo = alpha ** (k - 2) if k >= 2 else 1 / alpha
        hi = alpha ** (k - 1)
    else:
        lo = alpha ** (k - 1)
        hi = 2 * alpha ** k
    # alpha**0 is the exact ball 1, so the equality cases k = 1, 2 are decided exactly
    return lo.upper() <= value <= hi.lower()
