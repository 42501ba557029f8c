"""Certified real arithmetic on dyadic balls.

A :class:`CertReal` is a midpoint ``m * 2**e`` (exact Python integers) plus a
non-negative rational radius kept as a short dyadic rounded upward.  Every
operation returns a ball that provably contains the exact result of applying
the operation to any points of the input balls.  Decisions that cannot be made
from the enclosure (sign, floor, nearest integer) raise a
:class:`~repfib.errors.PrecisionError` subclass so callers can escalate.

Logarithms of rationals are evaluated with a fixed-point ``atanh`` series on
plain integers, with an explicit bound on truncation and rounding error.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Union

from .errors import AmbiguousFloor, AmbiguousNearest, AmbiguousSign, PrecisionExhausted, PrecisionError

RAD_BITS = 30

Number = Union[int, Fraction, "CertReal"]


def _pow2(k: int) -> Fraction:
    return Fraction(1 << k) if k >= 0 else Fraction(1, 1 << -k)


def _dyadic(m: int, e: int) -> Fraction:
    return Fraction(m << e) if e >= 0 else Fraction(m, 1 << -e)


def _rad_up(x: Fraction) -> Fraction:
    """Smallest RAD_BITS-bit dyadic >= x (x >= 0)."""
    if x <= 0:
        return Fraction(0)
    n, d = x.numerator, x.denominator
    shift = RAD_BITS - (n.bit_length() - d.bit_length())
    if shift >= 0:
        return Fraction(-((-n << shift) // d), 1 << shift)
    return Fraction(-((-n) // (d << -shift)) << -shift)


def _abs_up(m: int, e: int) -> Fraction:
    a = abs(m)
    s = a.bit_length() - RAD_BITS
    if s > 0:
        return _dyadic((a >> s) + 1, e + s)
    return _dyadic(a, e)


def _abs_lo(m: int, e: int) -> Fraction:
    a = abs(m)
    s = a.bit_length() - RAD_BITS
    if s > 0:
        return _dyadic(a >> s, e + s)
    return _dyadic(a, e)


def _round(m: int, e: int, prec: int) -> tuple[int, int, Fraction]:
    excess = abs(m).bit_length() - prec
    if excess <= 0:
        return m, e, Fraction(0)
    m2 = (m + (1 << (excess - 1))) >> excess
    return m2, e + excess, _pow2(e + excess - 1)


class Ordering(enum.Enum):
    LESS = -1
    GREATER = 1
    UNKNOWN = 0


class CertReal:
    """Immutable ball ``[mid - rad, mid + rad]`` with a dyadic midpoint."""

    __slots__ = ("_m", "_e", "_r", "prec")

    def __init__(self, m: int, e: int, rad: Fraction = Fraction(0), prec: int = 192):
        if type(rad) is not Fraction:
            rad = Fraction(rad)
        if rad < 0:
            raise ValueError("radius must be non-negative")
        self._m = m
        self._e = e
        self._r = rad
        self.prec = prec

    # -- construction -----------------------------------------------------

    @classmethod
    def exact(cls, x: int | Fraction, prec: int = 192) -> "CertReal":
        """Enclose a rational; exact when x is dyadic, else rounded to ``prec`` bits."""
        if isinstance(x, int):
            return cls(x, 0, Fraction(0), prec)
        x = Fraction(x)
        n, d = x.numerator, x.denominator
        if d & (d - 1) == 0:
            return cls(n, -(d.bit_length() - 1), Fraction(0), prec)
        w = prec + 2 - (abs(n).bit_length() - d.bit_length())
        if w >= 0:
            m = (n << w) // d
        else:
            m = n // (d << -w)
        return cls(m, -w, _pow2(-w), prec)

    @classmethod
    def ball(cls, mid: int | Fraction, rad: int | Fraction, prec: int = 192) -> "CertReal":
        c = cls.exact(mid, prec)
        return cls(c._m, c._e, _rad_up(c._r + Fraction(rad)), prec)

    @staticmethod
    def coerce(x: Number, prec: int = 192) -> "CertReal":
        if isinstance(x, CertReal):
            return x
        if isinstance(x, (int, Fraction)):
            return CertReal.exact(x, prec)
        raise TypeError(f"cannot enclose {type(x).__name__}")

    # -- accessors ----------------------------------------------------------

    @property
    def midpoint(self) -> Fraction:
        return _dyadic(self._m, self._e)

    @property
    def radius(self) -> Fraction:
        return self._r

    def lower(self) -> Fraction:
        return self.midpoint - self._r

    def upper(self) -> Fraction:
        return self.midpoint + self._r

    def contains(self, x: int | Fraction) -> bool:
        return abs(Fraction(x) - self.midpoint) <= self._r

    def is_positive(self) -> bool:
        if self._m <= 0:
            return False
        return _abs_lo(self._m, self._e) > self._r or self.midpoint > self._r

    def is_negative(self) -> bool:
        return (-self).is_positive()

    def is_exact(self) -> bool:
        return self._r == 0

    def with_prec(self, prec: int) -> "CertReal":
        m, e, err = _round(self._m, self._e, prec)
        return CertReal(m, e, _rad_up(self._r + err) if err else self._r, prec)

    def __float__(self) -> float:
        return float(self.midpoint)

    def __repr__(self) -> str:
        return f"CertReal({float(self.midpoint)!r} +/- {float(self._r):.3g}, {self.prec} bits)"

    # -- arithmetic -----------------------------------------------------------

    def _make(self, m: int, e: int, rad: Fraction, prec: int) -> "CertReal":
        m, e, err = _round(m, e, prec)
        return CertReal(m, e, _rad_up(rad + err), prec)

    def __neg__(self) -> "CertReal":
        return CertReal(-self._m, self._e, self._r, self.prec)

    def __pos__(self) -> "CertReal":
        return self

    def __abs__(self) -> "CertReal":
        return -self if self._m < 0 else self

    def __add__(self, other: Number) -> "CertReal":
        if not isinstance(other, CertReal):
            if isinstance(other, (int, Fraction)):
                other = CertReal.exact(other, self.prec)
            else:
                return NotImplemented
        e = min(self._e, other._e)
        m = (self._m << (self._e - e)) + (other._m << (other._e - e))
        return self._sum(m, e, other)

    __radd__ = __add__

    def __sub__(self, other: Number) -> "CertReal":
        if not isinstance(other, CertReal):
            if isinstance(other, (int, Fraction)):
                other = CertReal.exact(other, self.prec)
            else:
                return NotImplemented
        e = min(self._e, other._e)
        m = (self._m << (self._e - e)) - (other._m << (other._e - e))
        return self._sum(m, e, other)

    def _sum(self, m: int, e: int, other: "CertReal") -> "CertReal":
        prec = max(self.prec, other.prec)
        if not other._r:
            rad = self._r
        elif not self._r:
            rad = other._r
        else:
            rad = self._r + other._r
        m, e, err = _round(m, e, prec)
        if err:
            rad = _rad_up(rad + err)
        elif rad.denominator.bit_length() > 2 * RAD_BITS + 64 or rad.numerator.bit_length() > 2 * RAD_BITS:
            rad = _rad_up(rad)
        return CertReal(m, e, rad, prec)

    def __rsub__(self, other: Number) -> "CertReal":
        return CertReal.coerce(other, self.prec) - self

    def __mul__(self, other: Number) -> "CertReal":
        if not isinstance(other, CertReal):
            if isinstance(other, int):
                return self._make(self._m * other, self._e, self._r * abs(other), self.prec)
            if isinstance(other, Fraction):
                other = CertReal.exact(other, self.prec)
            else:
                return NotImplemented
        rad = (_abs_up(self._m, self._e) * other._r + _abs_up(other._m, other._e) * self._r
               + self._r * other._r)
        return self._make(self._m * other._m, self._e + other._e, rad, max(self.prec, other.prec))

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "CertReal":
        if not isinstance(other, CertReal):
            if isinstance(other, (int, Fraction)):
                other = CertReal.exact(other, self.prec)
            else:
                return NotImplemented
        prec = max(self.prec, other.prec)
        den_lo = _abs_lo(other._m, other._e) - other._r
        if other._m == 0 or den_lo <= 0:
            raise AmbiguousSign("divisor enclosure contains zero")
        shift = prec + 2 + other._m.bit_length() - self._m.bit_length()
        if shift >= 0:
            q = (self._m << shift) // other._m
        else:
            q = self._m // (other._m << -shift)
        e = self._e - other._e - shift
        err = _pow2(e)
        if self._r == 0 and other._r == 0:
            rad = err
        else:
            rad = err + (self._r + (_abs_up(q, e) + err) * other._r) / den_lo
        return self._make(q, e, rad, prec)

    def __rtruediv__(self, other: Number) -> "CertReal":
        return CertReal.coerce(other, self.prec) / self

    def __pow__(self, k: int) -> "CertReal":
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = CertReal(1, 0, Fraction(0), self.prec)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- certified decisions --------------------------------------------------

    def floor(self) -> int:
        lo, hi = math.floor(self.lower()), math.floor(self.upper())
        if lo != hi:
            raise AmbiguousFloor(f"floor undetermined for {self!r}")
        return lo

    def ceil_upper(self) -> int:
        """Ceiling of the upper endpoint: a safe integer upper bound."""
        return math.ceil(self.upper())

    def floor_upper(self) -> int:
        return math.floor(self.upper())

    def floor_lower(self) -> int:
        return math.floor(self.lower())

    def nearest_int(self) -> int:
        lo = math.floor(self.lower() + Fraction(1, 2))
        hi = math.floor(self.upper() + Fraction(1, 2))
        if lo != hi:
            raise AmbiguousNearest(f"enclosure {self!r} straddles a half-integer")
        return lo

    # -- serialization ----------------------------------------------------------

    def to_decimal(self, digits: int | None = None) -> tuple[str, str]:
        """Decimal ``(midpoint, radius)`` strings that still enclose the value."""
        if digits is None:
            digits = max(8, int(self.prec * 0.30103) + 2)
        mid = self.midpoint
        rad = self._r
        if mid == 0:
            mid_s, err = "0", Fraction(0)
        else:
            exp = _floor_log10(abs(mid)) - digits + 1
            scale = _pow10(exp)
            n = round(mid / scale)
            mid_s = f"{n}e{exp}"
            err = abs(mid - n * scale)
        return mid_s, _decimal_up(rad + err)


def _pow10(k: int) -> Fraction:
    return Fraction(10 ** k) if k >= 0 else Fraction(1, 10 ** -k)


def _floor_log10(x: Fraction) -> int:
    k = len(str(x.numerator)) - len(str(x.denominator))
    while _pow10(k) > x:
        k -= 1
    while _pow10(k + 1) <= x:
        k += 1
    return k


def _decimal_up(x: Fraction, digits: int = 6) -> str:
    if x == 0:
        return "0"
    exp = _floor_log10(x) - digits + 1
    n = math.ceil(x / _pow10(exp))
    return f"{n}e{exp}"


def from_decimal(mid: str, rad: str, bits: int) -> CertReal:
    return CertReal.ball(Fraction(mid), Fraction(rad), bits)


def cr_compare(x: Number, y: Number) -> Ordering:
    x = CertReal.coerce(x)
    y = CertReal.coerce(y)
    if x.upper() < y.lower():
        return Ordering.LESS
    if x.lower() > y.upper():
        return Ordering.GREATER
    return Ordering.UNKNOWN


def cr_dist_nearest_int(x: CertReal) -> CertReal:
    """Enclosure of ||x||, the distance from x to the nearest integer.

    ||.|| is 1-Lipschitz, so the midpoint's distance plus the same radius is a
    valid enclosure, whatever integer is nearest to the other points.
    """
    if x._r >= Fraction(1, 4):
        raise AmbiguousNearest(f"radius of {x!r} is at least 1/4")
    m, e = x._m, x._e
    if e >= 0:
        return CertReal(0, 0, x._r, x.prec)
    one = 1 << -e
    frac = m & (one - 1)
    return CertReal(min(frac, one - frac), e, x._r, x.prec)


# -- precision policy -------------------------------------------------------------


@dataclass(frozen=True)
class PrecisionPolicy:
    initial_bits: int = 192
    max_bits: int = 1_048_576
    escalation_factor: int = 2

    def __post_init__(self) -> None:
        if self.initial_bits < 1 or self.max_bits < 1:
            raise ValueError("precision bits must be positive")
        if self.initial_bits > self.max_bits:
            raise ValueError("initial_bits exceeds max_bits")
        if self.escalation_factor < 2:
            raise ValueError("escalation_factor must be at least 2")

    def schedule(self, start: int | None = None) -> Iterator[int]:
        bits = max(self.initial_bits, start or 0)
        while bits <= self.max_bits:
            yield bits
            bits *= self.escalation_factor
        if bits // self.escalation_factor < self.max_bits:
            yield self.max_bits


DEFAULT_POLICY = PrecisionPolicy()


def escalate(fn: Callable[[int], object], policy: PrecisionPolicy = DEFAULT_POLICY,
             start: int | None = None, what: str = "computation"):
    """Run ``fn(bits)`` with growing precision until no PrecisionError is raised."""
    last: Exception | None = None
    for bits in policy.schedule(start):
        try:
            return fn(bits)
        except PrecisionError as exc:
            last = exc
    raise PrecisionExhausted(f"{what}: max_bits={policy.max_bits} reached ({last})")


# -- memo for transcendental constants ------------------------------------------


class _Memo:
    """Keyed cache holding the highest-precision value computed so far."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._data: dict[object, CertReal] = {}

    def get(self, key: object, prec: int, compute: Callable[[int], CertReal]) -> CertReal:
        hit = self._data.get(key)
        if hit is not None and hit.prec >= prec:
            return hit if hit.prec == prec else hit.with_prec(prec)
        value = compute(prec)
        with self._lock:
            cur = self._data.get(key)
            if cur is None or cur.prec < value.prec:
                self._data[key] = value
        return value

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


_memo = _Memo()


def clear_cache() -> None:
    _memo.clear()


# -- logarithms --------------------------------------------------------------------


def _atanh2_fixed(num: int, den: int, w: int) -> tuple[int, int]:
    """Return (S, err) with |2*atanh(num/den)*2**w - S| <= err, for |num/den| <= 1/3."""
    if num == 0:
        return 0, 0
    sign = -1 if num < 0 else 1
    num = abs(num)
    t = (num << w) // den
    s2 = (num * num << w) // (den * den)
    total = 0
    j = 0
    while t:
        total += t // (2 * j + 1)
        t = (t * s2) >> w
        j += 1
    return sign * 2 * total, 2 * (5 * j + 4)


_log2_lock = threading.Lock()
_log2_fixed_cache: dict[str, tuple[int, int, int]] = {}


def _log2_fixed(w: int) -> tuple[int, int]:
    hit = _log2_fixed_cache.get("v")
    if hit is not None and hit[0] >= w:
        w0, val, err = hit
        s = w0 - w
        return val >> s, (err >> s) + 2
    val, err = _atanh2_fixed(1, 3, w)
    with _log2_lock:
        cur = _log2_fixed_cache.get("v")
        if cur is None or cur[0] < w:
            _log2_fixed_cache["v"] = (w, val, err)
    return val, err


def _log_rational_uncached(x: Fraction, prec: int) -> CertReal:
    p, q = x.numerator, x.denominator
    if x == 1:
        return CertReal(0, 0, Fraction(0), prec)
    k = p.bit_length() - q.bit_length()
    if k >= 0:
        a, b = p, q << k
    else:
        a, b = p << -k, q
    if 3 * a > 4 * b:
        b <<= 1
        k += 1
    elif 3 * a < 2 * b:
        a <<= 1
        k -= 1
    num, den = a - b, a + b
    # keep relative accuracy when x is close to a power of two
    extra = max(0, den.bit_length() - abs(num).bit_length()) if num else 0
    w = prec + 40 + extra + k.bit_length()
    s, err = _atanh2_fixed(num, den, w)
    if k:
        l2, err2 = _log2_fixed(w)
        s += k * l2
        err += abs(k) * err2
    out = CertReal(s, -w, Fraction(err, 1 << w), prec)
    return out.with_prec(prec)


def log_rational(x: int | Fraction, prec: int) -> CertReal:
    x = Fraction(x)
    if x <= 0:
        raise AmbiguousSign("logarithm of a non-positive number")
    return _memo.get(("log", x.numerator, x.denominator), prec,
                     lambda b: _log_rational_uncached(x, b))


def cr_log(x: Number, prec: int = 192) -> CertReal:
    """Certified natural logarithm of a positive rational or ball."""
    if not isinstance(x, CertReal):
        return log_rational(Fraction(x), prec)
    if x.is_exact():
        return log_rational(x.midpoint, prec)
    lo = x.lower()
    if lo <= 0:
        raise AmbiguousSign("logarithm argument enclosure is not strictly positive")
    base = log_rational(x.midpoint, prec)
    return CertReal(base._m, base._e, _rad_up(base.radius + x.radius / lo), prec)


def cr_sqrt(x: int | Fraction, prec: int = 192) -> CertReal:
    """Certified square root of a non-negative rational."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("square root of a negative number")
    if x == 0:
        return CertReal(0, 0, Fraction(0), prec)
    p, q = x.numerator, x.denominator
    w = max(0, prec + 8 - (p.bit_length() - q.bit_length()) // 2)
    s = math.isqrt((p << (2 * w)) // q)
    # true value * 2**w lies in [s, s + 1)
    return CertReal(2 * s + 1, -w - 1, _pow2(-w - 1), prec)


def golden_ratio(prec: int = 192) -> CertReal:
    return _memo.get("alpha", prec, lambda b: ((1 + cr_sqrt(5, b + 20)) / 2).with_prec(b))


def log_alpha(prec: int = 192) -> CertReal:
    return _memo.get("log_alpha", prec, lambda b: cr_log(golden_ratio(b + 20), b + 20).with_prec(b))


class RealExpr:
    """A named real number that can be enclosed at any requested precision."""

    def __init__(self, description: str, evaluate: Callable[[int], CertReal]):
        self.description = description
        self._evaluate = evaluate

    def __call__(self, prec: int) -> CertReal:
        return self._evaluate(prec)

    def __repr__(self) -> str:
        return f"RealExpr({self.description!r})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RealExpr) and other.description == self.description

    def __hash__(self) -> int:
        return hash(self.description)


def tau_expr(g: int) -> RealExpr:
    """log(alpha) / log(g)."""
    return RealExpr(f"log(alpha)/log({g})",
                    lambda b: _memo.get(("tau", g), b,
                                        lambda c: (log_alpha(c + 16) / log_rational(g, c + 16)).with_prec(c)))


def golden_expr() -> RealExpr:
    return RealExpr("(1+sqrt(5))/2", golden_ratio)


def quadratic_surd_expr(a: int, b: int, c: int) -> RealExpr:
    """(a + sqrt(b)) / c with b > 0 not a perfect square."""
    return RealExpr(f"({a}+sqrt({b}))/{c}", lambda p: ((a + cr_sqrt(b, p + 8)) / c).with_prec(p))
