"""Certified continued-fraction expansions of irrational reals."""

from __future__ import annotations

import bisect
import threading
from dataclasses import dataclass

from .certreal import DEFAULT_POLICY, PrecisionPolicy, RealExpr
from .errors import PrecisionExhausted


@dataclass(frozen=True)
class Convergent:
    index: int
    partial_quotient: int
    p: int
    q: int

    def to_json(self) -> dict:
        return {"index": self.index, "a": str(self.partial_quotient), "p": str(self.p), "q": str(self.q)}


@dataclass(frozen=True)
class CFExpansion:
    target: str
    convergents: tuple[Convergent, ...]
    bits: int

    @property
    def certified_through(self) -> int:
        return len(self.convergents) - 1

    def partial_quotients(self) -> list[int]:
        return [c.partial_quotient for c in self.convergents]

    def locate(self, value: int) -> int | None:
        """Index of the convergent whose numerator or denominator equals ``value``."""
        for c in self.convergents:
            if value in (c.p, c.q):
                return c.index
        return None


def certified_quotients(lo_num: int, lo_den: int, hi_num: int, hi_den: int) -> list[int]:
    """Partial quotients shared by every real strictly inside [lo, hi].

    Each step keeps both endpoints exact; the expansion stops as soon as the two
    floors differ or an endpoint hits an integer.
    """
    a, b, c, d = lo_num, lo_den, hi_num, hi_den
    out: list[int] = []
    while b > 0 and d > 0:
        f, r1 = divmod(a, b)
        f2, r2 = divmod(c, d)
        if f != f2 or r1 == 0 or r2 == 0:
            break
        out.append(f)
        # x -> 1/(x - f) reverses the order of the endpoints
        a, b, c, d = d, r2, b, r1
    return out


def convergents_from_quotients(quotients: list[int]) -> list[Convergent]:
    p0, p1 = 0, 1
    q0, q1 = 1, 0
    out = []
    for i, a in enumerate(quotients):
        p0, p1 = p1, a * p1 + p0
        q0, q1 = q1, a * q1 + q0
        out.append(Convergent(i, a, p1, q1))
    return out


class _Expander:
    """Resumable expansion of one target; grows by re-evaluating at higher precision."""

    def __init__(self, target: RealExpr, policy: PrecisionPolicy):
        self.target = target
        self.policy = policy
        self.quotients: list[int] = []
        self.bits = 0
        self._snap: CFExpansion | None = None
        self._lock = threading.Lock()

    def _refine(self, min_bits: int) -> None:
        bits = max(self.policy.initial_bits, min_bits, self.bits * self.policy.escalation_factor)
        if bits > self.policy.max_bits:
            if self.bits >= self.policy.max_bits:
                raise PrecisionExhausted(
                    f"continued fraction of {self.target.description}: max_bits={self.policy.max_bits} reached")
            bits = self.policy.max_bits
        x = self.target(bits)
        lo, hi = x.lower(), x.upper()
        quotients = certified_quotients(lo.numerator, lo.denominator, hi.numerator, hi.denominator)
        n = min(len(quotients), len(self.quotients))
        if quotients[:n] != self.quotients[:n]:
            raise AssertionError(f"certified prefix changed for {self.target.description}")
        if len(quotients) > len(self.quotients):
            self.quotients = quotients
        self.bits = bits
        self._snap = None

    def ensure_index(self, index: int) -> None:
        with self._lock:
            while len(self.quotients) <= index:
                # roughly 3.5 bits per partial quotient for typical reals
                self._refine(int(8 * (index + 1)) + 64)

    def ensure_q_exceeding(self, bound: int) -> None:
        with self._lock:
            while True:
                conv = self._snapshot().convergents
                if conv and conv[-1].q > bound:
                    return
                self._refine(2 * bound.bit_length() + 96)

    def _snapshot(self) -> CFExpansion:
        if self._snap is None:
            self._snap = CFExpansion(self.target.description,
                                     tuple(convergents_from_quotients(self.quotients)), self.bits)
        return self._snap

    def snapshot(self) -> CFExpansion:
        with self._lock:
            return self._snapshot()


_registry: dict[tuple[str, PrecisionPolicy], _Expander] = {}
_registry_lock = threading.Lock()


def _expander(x: RealExpr, policy: PrecisionPolicy) -> _Expander:
    key = (x.description, policy)
    with _registry_lock:
        exp = _registry.get(key)
        if exp is None:
            exp = _registry[key] = _Expander(x, policy)
    return exp


def cf_expand(x: RealExpr, min_index: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> CFExpansion:
    if min_index < 0:
        raise ValueError("min_index must be >= 0")
    exp = _expander(x, policy)
    exp.ensure_index(min_index)
    return exp.snapshot()


def first_q_exceeding(x: RealExpr, bound: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> Convergent:
    """Convergent of minimal index with denominator > bound."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    exp = _expander(x, policy)
    exp.ensure_q_exceeding(bound)
    convs = exp.snapshot().convergents
    # q_t is strictly increasing for t >= 1
    i = bisect.bisect_right([c.q for c in convs], bound)
    return convs[i]


def max_partial_quotient(x: RealExpr, M: int, policy: PrecisionPolicy = DEFAULT_POLICY) -> tuple[int, int]:
    """(max a_i over i <= N, N) where N is minimal with q_N > M."""
    if M < 1:
        raise ValueError("M must be >= 1")
    last = first_q_exceeding(x, M, policy)
    exp = _expander(x, policy).snapshot()
    return max(c.partial_quotient for c in exp.convergents[: last.index + 1]), last.index
