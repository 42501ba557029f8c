"""Heights, Matveev's lower bound and the global inequality chain.

The chain mirrors the three linear forms used for each sequence kind:

* stage 1 bounds ell from ``|(g-1)^3/(d1 d2 d3 [sqrt 5]) alpha^k g^-(l+m+n) - 1| < 8 g^-l``
* stage 2 bounds m once ell is known (right-hand side ``4 g^-m``)
* stage 3 bounds n once ell and m are known (right-hand side ``2 g^-(n-1)``)

Each coefficient is computed with certified reals, so the resulting caps are
valid upper bounds rather than rounded estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .certreal import (
    CertReal,
    cr_log,
    cr_sqrt,
    log_alpha,
    log_rational,
)
from .errors import AmbiguousFloor, HeightCheckFailed, HypothesisFailed, ZeroDenominator
from .sequences import SequenceKind

DEFAULT_BITS = 256

# Coefficients printed alongside each step, kept for comparison in traces.
PUBLISHED = {
    SequenceKind.FIBONACCI: {
        "ell": Fraction(75, 10) * 10**13,
        "shifted_ell": Fraction(76, 10) * 10**13,
        "m": Fraction(15, 10) * 10**27,
        "sum": 3 * 10**27,
        "H": Fraction(57, 10) * 10**40,
        "n_closed_form": Fraction(108, 100) * 10**48,
    },
    SequenceKind.LUCAS: {
        "ell": Fraction(57, 10) * 10**13,
        "shifted_ell": Fraction(58, 10) * 10**13,
        "m": Fraction(11, 10) * 10**27,
        "sum": Fraction(22, 10) * 10**27,
        "H": Fraction(42, 10) * 10**40,
        "n_closed_form": Fraction(773, 100) * 10**47,
    },
}

# right-hand side numerators of the three linear forms: 8 g^-l, 4 g^-m, 2 g^-(n-1)
STAGE_DELTA = {1: 8, 2: 4, 3: 2}

NONVANISHING = {
    1: "alpha^(2k) would be rational",
    2: "alpha^(2k) would be rational",
    3: "alpha^(2k) would be rational",
}


def _shift(kind: SequenceKind) -> int:
    """Additive constant in the closed-form height bound of eta_1 (5 or 3)."""
    return 5 if kind is SequenceKind.FIBONACCI else 3


def _a1_coeff(kind: SequenceKind) -> int:
    return 8 if kind is SequenceKind.FIBONACCI else 6


# -- heights -----------------------------------------------------------------------


@dataclass(frozen=True)
class HeightBound:
    value: CertReal
    description: str

    def __post_init__(self) -> None:
        if self.value.is_negative():
            raise ValueError("a height is never negative")


def height_rational(p: int, q: int, prec: int = DEFAULT_BITS) -> HeightBound:
    """h(p/q) = log max(|p|, q) for the reduced fraction."""
    if q == 0:
        raise ZeroDenominator("height of p/0 is undefined")
    x = Fraction(p, q)
    top = max(abs(x.numerator), x.denominator)
    return HeightBound(log_rational(top, prec), f"h({x})")


def _stage_ratio(g: int, digits: tuple[int, int, int], ell: int | None, m: int | None) -> Fraction:
    """The rational part (g-1)^3 / (d1 d2 d3 (g^l-1) (g^m-1)) of eta_1."""
    den = digits[0] * digits[1] * digits[2]
    if ell is not None:
        den *= g ** ell - 1
    if m is not None:
        den *= g ** m - 1
    return Fraction((g - 1) ** 3, den)


def eta1_height(kind: SequenceKind, r: Fraction, prec: int = DEFAULT_BITS) -> CertReal:
    """Exact height of eta_1 = r (Lucas) or r / sqrt(5) (Fibonacci)."""
    if kind is SequenceKind.LUCAS:
        return height_rational(r.numerator, r.denominator, prec).value
    u, v = r.numerator, r.denominator
    # minimal polynomial a0 x^2 - b with a0 = 5 v^2 (or v^2 when 5 | u)
    a0 = v * v if u % 5 == 0 else 5 * v * v
    h = log_rational(a0, prec) / 2
    if r * r > 5:
        h = h + log_rational(r, prec) - log_rational(5, prec) / 2
    return h


def eta1_log_abs(kind: SequenceKind, r: Fraction, prec: int = DEFAULT_BITS) -> CertReal:
    x = log_rational(r, prec)
    if kind is SequenceKind.FIBONACCI:
        x = x - log_rational(5, prec) / 2
    return abs(x)


# -- Matveev -------------------------------------------------------------------------


def matveev_constant(s: int = 3, dL: int = 2, prec: int = DEFAULT_BITS) -> CertReal:
    """1.4 * 30^(s+3) * s^4.5 * dL^2 * (1 + log dL)."""
    if s < 1 or dL < 1:
        raise ValueError("s and dL must be positive")
    c = CertReal.exact(Fraction(7, 5), prec) * (30 ** (s + 3) * s ** 4 * dL * dL)
    return c * cr_sqrt(s, prec) * (1 + log_rational(dL, prec))


@dataclass(frozen=True)
class MatveevInstance:
    s: int
    dL: int
    B: CertReal
    A: tuple[CertReal, ...]
    # optional certified values of max(dL h(eta_i), |log eta_i|) to check against A
    requirements: tuple[CertReal | None, ...] | None = None

    def __post_init__(self) -> None:
        if self.s < 1 or self.dL < 1:
            raise ValueError("s and dL must be positive")
        if len(self.A) != self.s:
            raise ValueError(f"expected {self.s} A-values, got {len(self.A)}")
        if self.B.lower() < 1:
            raise ValueError("B must be >= 1")
        floor_ = Fraction(16, 100)
        for i, a in enumerate(self.A):
            need = floor_
            if self.requirements is not None and self.requirements[i] is not None:
                need = max(need, self.requirements[i].upper())
            if a.lower() < need:
                raise HeightCheckFailed(f"A_{i + 1} = {float(a):.6g} is below the required {float(need):.6g}")


def matveev_log_lower_bound(inst: MatveevInstance) -> CertReal:
    """Certified lower bound on log|Lambda| (a negative number)."""
    prec = max(a.prec for a in inst.A)
    prod = matveev_constant(inst.s, inst.dL, prec) * (1 + cr_log(inst.B, prec))
    for a in inst.A:
        prod = prod * a
    return -prod


# -- stage configurations ------------------------------------------------------------


@dataclass(frozen=True)
class LinearFormStage:
    kind: SequenceKind
    stage: int
    g: int
    digits: tuple[int, int, int]
    ell: int | None = None
    m: int | None = None

    def __post_init__(self) -> None:
        if self.stage not in (1, 2, 3):
            raise ValueError("stage must be 1, 2 or 3")
        if self.g < 2:
            raise ValueError("base must be >= 2")
        if len(self.digits) != 3 or not all(1 <= d <= self.g - 1 for d in self.digits):
            raise ValueError(f"digits {self.digits} outside 1..{self.g - 1}")
        if self.stage >= 2 and (self.ell is None or self.ell < 1):
            raise ValueError("stages 2 and 3 need ell >= 1")
        if self.stage == 3 and (self.m is None or self.m < 1):
            raise ValueError("stage 3 needs m >= 1")
        if self.stage == 1 and (self.ell is not None or self.m is not None):
            raise ValueError("stage 1 takes no exponents")
        if self.stage == 2 and self.m is not None:
            raise ValueError("stage 2 takes only ell")

    @property
    def ratio(self) -> Fraction:
        return _stage_ratio(self.g, self.digits, self.ell, self.m)


def stage_heights(stage: LinearFormStage, prec: int = DEFAULT_BITS) -> tuple[CertReal, CertReal, CertReal]:
    """Closed-form A-values for the stage, checked against the true height of eta_1."""
    G = log_rational(stage.g, prec)
    la = log_alpha(prec)
    s0 = _shift(stage.kind)
    if stage.stage == 1:
        a1 = _a1_coeff(stage.kind) * G
    elif stage.stage == 2:
        a1 = 2 * (s0 + stage.ell) * G
    else:
        a1 = 2 * (s0 + stage.ell + stage.m) * G
    r = stage.ratio
    need = max(2 * eta1_height(stage.kind, r, prec).upper(), eta1_log_abs(stage.kind, r, prec).upper(),
               Fraction(16, 100))
    if a1.lower() < need:
        raise HeightCheckFailed(
            f"A_1 = {float(a1):.6g} below max(2h, |log eta_1|) = {float(need):.6g} for {stage}")
    # h(alpha) = log(alpha)/2 and h(g) = log g, so the other two A-values are identities
    if stage.stage == 3:
        return a1, 2 * G, la
    return a1, la, 2 * G


# -- integer caps ----------------------------------------------------------------------


def _floor_certified(make, prec: int) -> int:
    for bits in (prec, 2 * prec, 4 * prec):
        x = make(bits)
        try:
            return x.floor()
        except AmbiguousFloor:
            continue
    return x.floor_upper()


def k_cap(n: int, g: int, kind: SequenceKind, prec: int = 128) -> int:
    """Largest k allowed by alpha^(k-2) <= F_k < g^(3n) (Lucas: alpha^(k-1) <= L_k)."""
    if n < 1 or g < 2:
        raise ValueError("need n >= 1 and g >= 2")
    shift = 2 if kind is SequenceKind.FIBONACCI else 1
    bits = prec + 2 * n.bit_length()
    return _floor_certified(lambda b: 3 * n * log_rational(g, b) / log_alpha(b) + shift, bits)


def crude_k_cap(n: int, g: int, prec: int = 128) -> int:
    """floor(10 n log g), the looser cap used when printing search boxes."""
    if n < 1 or g < 2:
        raise ValueError("need n >= 1 and g >= 2")
    bits = prec + 2 * n.bit_length()
    return _floor_certified(lambda b: 10 * n * log_rational(g, b), bits)


def real_ceiling_bound(x: CertReal) -> int:
    """Largest integer strictly below every point of the ball's upper side: from v < x, v <= this."""
    return x.ceil_upper() - 1


# -- Guzman-Luca ---------------------------------------------------------------------------


def guzman_luca_resolve(l: int, H: CertReal) -> CertReal:
    """From L / (log L)^l < H deduce L < 2^l H (log H)^l."""
    if l < 1:
        raise ValueError("l must be >= 1")
    H = CertReal.coerce(H)
    if H.lower() <= (4 * l * l) ** l:
        raise HypothesisFailed(f"H = {float(H):.6g} does not exceed (4 l^2)^l = {(4 * l * l) ** l}")
    return (2 ** l) * H * cr_log(H, H.prec) ** l


# -- global chain ------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceEntry:
    name: str
    reference: str
    values: dict[str, Any]

    def to_json(self) -> dict:
        return {"name": self.name, "reference": self.reference,
                "values": {k: _json_value(v) for k, v in self.values.items()}}


def _json_value(v: Any) -> Any:
    if isinstance(v, CertReal):
        mid, rad = v.to_decimal(20)
        return {"mid": mid, "rad": rad, "bits": v.prec}
    if isinstance(v, bool):
        return v
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    return v


@dataclass(frozen=True)
class BoundExpr:
    """``variable < coefficient * form``, with the coefficient certified."""

    coefficient: CertReal
    form: str

    def to_json(self) -> dict:
        return {"coefficient": _json_value(self.coefficient), "form": self.form}


@dataclass(frozen=True)
class BoundCertificate:
    g: int
    kind: SequenceKind
    ell_coeff: CertReal
    m_bound_expr: BoundExpr
    n_bound_expr: BoundExpr
    n_max: int
    k_max: int
    trace: tuple[TraceEntry, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not all(e.reference for e in self.trace):
            raise ValueError("every trace entry needs a reference")

    def to_json(self) -> dict:
        return {
            "g": self.g,
            "kind": self.kind.value,
            "ell_coeff": _json_value(self.ell_coeff),
            "m_bound_expr": self.m_bound_expr.to_json(),
            "n_bound_expr": self.n_bound_expr.to_json(),
            "n_max": str(self.n_max),
            "k_max": str(self.k_max),
            "trace": [e.to_json() for e in self.trace],
        }


@dataclass(frozen=True)
class ChainConstants:
    """Certified coefficients of the global chain for one (g, kind)."""

    g: int
    kind: SequenceKind
    C: CertReal          # Matveev prefactor for s=3, dL=2
    c_m: CertReal        # 40 C log(alpha): m (or n) per unit of (s0 + exponents) log n log^2 g
    a_m: CertReal        # log 4 / log g
    a_n: CertReal        # 1 + log 2 / log g
    c_ell: CertReal
    c_sl: CertReal
    c_mm: CertReal
    c_sum: CertReal
    c_H: CertReal
    prec: int

    @property
    def s0(self) -> int:
        return _shift(self.kind)


def chain_constants(g: int, kind: SequenceKind, prec: int = DEFAULT_BITS) -> ChainConstants:
    if g < 2:
        raise ValueError("base must be >= 2")
    G = log_rational(g, prec)
    l2 = log_rational(2, prec)
    la = log_alpha(prec)
    C = matveev_constant(3, 2, prec)
    s0 = _shift(kind)
    # stage 1: l log g - log 8 < C (1 + log B) * 2 A1coef log(alpha) log^2 g, then 1 + log B < 10 log n log g
    c_ell = 20 * _a1_coeff(kind) * C * la + log_rational(8, prec) / (G ** 3 * l2)
    c_m = 40 * C * la
    a_m = log_rational(4, prec) / G
    c_sl = c_ell + s0 / (l2 * G ** 2)
    c_mm = c_m * c_sl + a_m / (l2 ** 2 * G ** 4)
    c_sum = s0 / (l2 ** 2 * G ** 4) + c_ell / (l2 * G ** 2) + c_mm
    a_n = 1 + l2 / G
    c_H = c_m * c_sum + a_n / (l2 ** 3 * G ** 6)
    return ChainConstants(g, kind, C, c_m, a_m, a_n, c_ell, c_sl, c_mm, c_sum, c_H, prec)


def absorption_holds(g: int, prec: int = DEFAULT_BITS) -> bool:
    """1 + log(10 n log g) < 10 log n log g for every n >= 2.

    Checked at n = 2; the difference grows with n since its n-derivative is
    (10 log g - 1)/n > 0 for g >= 2.
    """
    G = log_rational(g, prec)
    lhs = 1 + cr_log(20 * G, prec)
    rhs = 10 * log_rational(2, prec) * G
    return lhs.upper() < rhs.lower() and (10 * G - 1).is_positive()


def log_loglog_absorption_holds(g: int, prec: int = DEFAULT_BITS) -> bool:
    """93.84 + 6 log log g < 133 log g, used to reach the closed form n < c log^9 g."""
    G = log_rational(g, prec)
    lhs = CertReal.exact(Fraction(9384, 100), prec) + 6 * cr_log(G, prec)
    return lhs.upper() < (133 * G).lower()


def closed_form_n(g: int, kind: SequenceKind, prec: int = DEFAULT_BITS) -> CertReal:
    return PUBLISHED[kind]["n_closed_form"] * log_rational(g, prec) ** 9


def resolve_n(H: CertReal, l: int) -> int:
    """Integer cap on n from n / (log n)^l < H."""
    return real_ceiling_bound(guzman_luca_resolve(l, H))


def global_bounds(g: int, kind: SequenceKind, prec: int = DEFAULT_BITS) -> BoundCertificate:
    """Unconditional caps on n and k from Matveev's theorem (valid for n >= 2)."""
    if g < 2:
        raise ValueError("base must be >= 2")
    if not absorption_holds(g, prec):
        raise HypothesisFailed(f"1 + log(10 n log g) < 10 log n log g fails for g = {g}")
    cc = chain_constants(g, kind, prec)
    pub = PUBLISHED[kind]
    G = log_rational(g, prec)
    s0 = cc.s0
    trace: list[TraceEntry] = []
    trace.append(TraceEntry("Matveev prefactor", "Matveev lower bound",
                            {"C": cc.C, "s": 3, "dL": 2}))
    trace.append(TraceEntry("nonvanishing of the three linear forms", "Galois conjugation",
                            {f"stage_{i}": NONVANISHING[i] for i in (1, 2, 3)}))
    trace.append(TraceEntry("absorption 1 + log(10 n log g) < 10 log n log g", "plumbing",
                            {"g": g, "holds": True}))
    trace.append(TraceEntry("k < 10 n log g", "k-n relation", {"B": "10 n log g"}))
    trace.append(TraceEntry("ell < c_ell log n log^2 g", "Matveev lower bound",
                            {"c_ell": cc.c_ell, "published": pub["ell"],
                             "A1": f"{_a1_coeff(kind)} log g"}))
    trace.append(TraceEntry(f"m < c_m ({s0} + ell) log n log^2 g + a_m", "Matveev lower bound",
                            {"c_m": cc.c_m, "a_m": cc.a_m, "a_m_at_most_2": g * g >= 4,
                             "a_n_at_most_2": g >= 2}))
    trace.append(TraceEntry(f"{s0} + ell < c_sl log n log^2 g", "plumbing",
                            {"c_sl": cc.c_sl, "published": pub["shifted_ell"]}))
    trace.append(TraceEntry("m < c_mm log^2 n log^4 g", "plumbing",
                            {"c_mm": cc.c_mm, "published": pub["m"]}))
    trace.append(TraceEntry(f"n < c_m ({s0} + ell + m) log n log^2 g + a_n", "Matveev lower bound",
                            {"c_n": cc.c_m, "a_n": cc.a_n}))
    trace.append(TraceEntry(f"{s0} + ell + m < c_sum log^2 n log^4 g", "plumbing",
                            {"c_sum": cc.c_sum, "published": pub["sum"]}))
    H = cc.c_H * G ** 6
    trace.append(TraceEntry("n < c_H log^3 n log^6 g", "plumbing",
                            {"c_H": cc.c_H, "published": pub["H"], "H": H}))
    bound = guzman_luca_resolve(3, H)
    n_max = real_ceiling_bound(bound)
    closed = closed_form_n(g, kind, prec)
    trace.append(TraceEntry("n < 8 H log^3 H", "Guzman-Luca lemma",
                            {"l": 3, "bound": bound, "n_max": n_max, "closed_form": closed,
                             "within_closed_form": Fraction(n_max) <= closed.lower(),
                             "loglog_absorption": log_loglog_absorption_holds(g, prec)}))
    k_max = k_cap(n_max, g, kind)
    trace.append(TraceEntry("k < 3 n log g / log alpha + c", "k-n relation",
                            {"k_max": k_max, "crude_k_max": crude_k_cap(n_max, g)}))
    return BoundCertificate(
        g=g, kind=kind, ell_coeff=cc.c_ell,
        m_bound_expr=BoundExpr(cc.c_mm, "log^2 n log^4 g"),
        n_bound_expr=BoundExpr(cc.c_H, "log^3 n log^6 g"),
        n_max=n_max, k_max=k_max, trace=tuple(trace))


# -- re-propagation after reduction ------------------------------------------------------------


def n_bound_after_ell(cc: ChainConstants, ell_max: int) -> tuple[CertReal, int]:
    """Substitute ell <= ell_max into the m- and n-inequalities: n / log^2 n < H2."""
    G = log_rational(cc.g, cc.prec)
    l2 = log_rational(2, cc.prec)
    t = cc.s0 + ell_max
    H2 = (cc.c_m * cc.c_m * t * G ** 4 + cc.c_m * (t + cc.a_m) * G ** 2 / l2
          + cc.a_n / l2 ** 2)
    return H2, resolve_n(H2, 2)


def n_bound_after_m(cc: ChainConstants, ell_max: int, m_max: int) -> tuple[CertReal, int]:
    """Substitute ell <= ell_max and m <= m_max into the n-inequality: n / log n < H1."""
    G = log_rational(cc.g, cc.prec)
    l2 = log_rational(2, cc.prec)
    H1 = cc.c_m * (cc.s0 + ell_max + m_max) * G ** 2 + cc.a_n / l2
    return H1, resolve_n(H1, 1)


__all__ = [
    "BoundCertificate", "BoundExpr", "ChainConstants", "HeightBound", "LinearFormStage",
    "MatveevInstance", "PUBLISHED", "STAGE_DELTA", "TraceEntry", "absorption_holds",
    "chain_constants", "closed_form_n", "crude_k_cap", "eta1_height", "eta1_log_abs",
    "global_bounds", "guzman_luca_resolve", "height_rational", "k_cap",
    "log_loglog_absorption_holds", "matveev_constant", "matveev_log_lower_bound",
    "n_bound_after_ell", "n_bound_after_m", "real_ceiling_bound", "stage_heights",
]
