"""Baker-Davenport style reduction of the exponent bounds.

Each stage turns ``|e^z - 1| < delta * g^-w`` into

    0 < |k tau - N + mu| < A g^-w,      k <= M,

with ``tau = log(alpha)/log(g)`` and a digit-dependent shift ``mu``.  The
Dujella-Petho criterion handles generic ``mu``; when ``mu`` is an integer (or
within ``1/((a(M)+2) M)`` of one) the Legendre criterion takes over.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .certreal import (
    DEFAULT_POLICY,
    CertReal,
    PrecisionPolicy,
    RealExpr,
    cr_dist_nearest_int,
    cr_log,
    log_rational,
    tau_expr,
)
from .contfrac import Convergent, cf_expand, first_q_exceeding, max_partial_quotient
from .errors import NoPositiveEpsilon, PrecisionError
from .linear_forms import STAGE_DELTA
from .sequences import SequenceKind

DEFAULT_PROBES = 25
_EPS_ATTEMPTS = 4


class ReductionMethod(enum.Enum):
    DUJELLA_PETHO = "dujella-petho"
    LEGENDRE = "legendre"


@dataclass(frozen=True)
class ReductionProblem:
    """0 < |k tau - N + mu| < A B^-w with 1 <= k <= M."""

    tau: RealExpr
    mu: RealExpr
    A: CertReal
    B: CertReal
    M: int

    def __post_init__(self) -> None:
        if not self.A.is_positive():
            raise ValueError("A must be positive")
        if self.B.lower() <= 1:
            raise ValueError("B must exceed 1")
        if self.M < 1:
            raise ValueError("M must be >= 1")


@dataclass(frozen=True)
class ReductionOutcome:
    method: ReductionMethod
    w_bound: int
    convergent_used: Convergent
    epsilon: CertReal | None = None
    a_M: int | None = None
    mu_gap: CertReal | None = None   # |mu - nearest integer| on the Legendre path
    probes: int = 0

    def __post_init__(self) -> None:
        if self.w_bound < 0:
            raise ValueError("w_bound must be >= 0")
        if self.method is ReductionMethod.DUJELLA_PETHO and (self.epsilon is None or not self.epsilon.is_positive()):
            raise ValueError("Dujella-Petho outcome needs a certified positive epsilon")

    def to_json(self) -> dict:
        out = {"method": self.method.value, "w_bound": self.w_bound,
               "convergent_index": self.convergent_used.index,
               "q": str(self.convergent_used.q)}
        if self.epsilon is not None:
            out["epsilon"] = _ball_json(self.epsilon)
        if self.a_M is not None:
            out["a_M"] = str(self.a_M)
        if self.mu_gap is not None:
            out["mu_gap"] = _ball_json(self.mu_gap)
        out["probes"] = self.probes
        return out


def _ball_json(x: CertReal) -> dict:
    mid, rad = x.to_decimal(20)
    return {"mid": mid, "rad": rad, "bits": x.prec}


def _dist_to_int(x: CertReal) -> CertReal:
    """Ball around ||x||, valid even when x straddles a half-integer."""
    if x.radius >= Fraction(1, 4):
        raise PrecisionError("radius too large for a distance to the nearest integer")
    return cr_dist_nearest_int(x)


def _log_bound(num: CertReal, B: CertReal) -> int:
    """Largest integer w >= 0 with B^w < num possibly true, i.e. ceil(log num / log B) - 1."""
    U = num.upper()
    if U <= 1:
        return 0
    if B.is_exact() and B.midpoint.denominator == 1:
        b = B.midpoint.numerator
        # exact integer powers: largest w with b^w < U
        w = max(0, int(float(U.numerator.bit_length() - U.denominator.bit_length()) / b.bit_length()) - 2)
        p = b ** w
        while w > 0 and p >= U:
            p //= b
            w -= 1
        while p * b < U:
            p *= b
            w += 1
        return w
    x = cr_log(U, num.prec) / cr_log(B.lower(), num.prec)
    return max(0, x.ceil_upper() - 1)


def _epsilon(prob: ReductionProblem, conv: Convergent) -> CertReal | None:
    """Certified ||mu q|| - M ||tau q||, or None when it is not provably positive."""
    bits = conv.q.bit_length() + prob.M.bit_length() + 64
    for _ in range(_EPS_ATTEMPTS):
        try:
            mu = prob.mu(bits)
            tau = prob.tau(bits)
            eps = _dist_to_int(mu * conv.q) - prob.M * abs(tau * conv.q - conv.p)
        except PrecisionError:
            bits *= 2
            continue
        if eps.is_positive():
            return eps
        if eps.upper() <= 0:
            return None
        bits *= 2
    return None


def dujella_petho_reduce(prob: ReductionProblem, max_convergent_probes: int = DEFAULT_PROBES,
                         policy: PrecisionPolicy = DEFAULT_POLICY) -> ReductionOutcome:
    """No solution has w > w_bound, provided epsilon > 0 at some convergent q > 6M."""
    first = first_q_exceeding(prob.tau, 6 * prob.M, policy)
    exp = cf_expand(prob.tau, first.index + max_convergent_probes, policy)
    for j in range(first.index, first.index + max_convergent_probes + 1):
        conv = exp.convergents[j]
        eps = _epsilon(prob, conv)
        if eps is None:
            continue
        bits = eps.prec
        num = prob.A.with_prec(bits) * conv.q / eps
        return ReductionOutcome(ReductionMethod.DUJELLA_PETHO, _log_bound(num, prob.B), conv,
                                epsilon=eps, probes=j - first.index + 1)
    raise NoPositiveEpsilon(
        f"epsilon <= 0 for {max_convergent_probes + 1} convergents past q > 6M (mu = {prob.mu.description})")


def legendre_reduce(kappa: RealExpr, M: int, A: CertReal, B: CertReal, rhs_shift: int = 0,
                    policy: PrecisionPolicy = DEFAULT_POLICY) -> ReductionOutcome:
    """Bound for |k kappa - N| < A B^-w with 1 <= k <= M (mu = rhs_shift is an integer).

    Any k <= M has |kappa - N/k| >= 1/((a(M)+2) k^2), hence B^w < A (a(M)+2) M.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    a, N = max_partial_quotient(kappa, M, policy)
    conv = cf_expand(kappa, N, policy).convergents[N]
    bits = 2 * M.bit_length() + 64
    num = A.with_prec(bits) * ((a + 2) * M)
    return ReductionOutcome(ReductionMethod.LEGENDRE, _log_bound(num, B), conv, a_M=a,
                            mu_gap=CertReal.exact(0, bits))


def near_legendre_reduce(prob: ReductionProblem, policy: PrecisionPolicy = DEFAULT_POLICY) -> ReductionOutcome | None:
    """Legendre bound when mu is within lambda = 1/((a(M)+2) M) of an integer.

    |k tau - N'| >= lambda for all k <= M, so A B^-w > lambda - |mu - b|.
    Returns None if the gap is not certifiably below lambda.
    """
    a, N = max_partial_quotient(prob.tau, prob.M, policy)
    lam = Fraction(1, (a + 2) * prob.M)
    bits = 2 * prob.M.bit_length() + 64
    for _ in range(_EPS_ATTEMPTS):
        try:
            gap = _dist_to_int(prob.mu(bits))
        except PrecisionError:
            bits *= 2
            continue
        if gap.lower() >= lam:
            return None
        if gap.upper() < lam:
            room = CertReal.exact(lam, bits) - gap.upper()
            conv = cf_expand(prob.tau, N, policy).convergents[N]
            num = prob.A.with_prec(bits) / room
            return ReductionOutcome(ReductionMethod.LEGENDRE, _log_bound(num, prob.B), conv,
                                    a_M=a, mu_gap=gap)
        bits *= 2
    return None


# -- stage families -------------------------------------------------------------------


def bridge(g: int, stage: int) -> tuple[int, Fraction]:
    """(w_min, c): for w >= w_min, delta(w) <= 4/5 and |e^z - 1| < delta gives |z| < c delta."""
    coeff = STAGE_DELTA[stage]
    w = 1
    while Fraction(coeff, g ** w) > Fraction(4, 5):
        w += 1
    return w, 1 / (1 - Fraction(coeff, g ** w))


def stage_A(g: int, stage: int, prec: int = 256) -> CertReal:
    """A = coeff * c / log g for the stage's reduction inequality."""
    _, c = bridge(g, stage)
    return STAGE_DELTA[stage] * c / log_rational(g, prec)


class StageContext:
    """Data shared by every member of one stage family.

    tau, the probe convergents past q > 6M, a(M) and the logs entering mu are
    computed once; members then cost a handful of ball operations each.
    """

    def __init__(self, kind: SequenceKind, g: int, M: int, A: CertReal,
                 policy: PrecisionPolicy = DEFAULT_POLICY, probes: int = DEFAULT_PROBES):
        if M < 1:
            raise ValueError("M must be >= 1")
        self.kind, self.g, self.M, self.A, self.policy = kind, g, M, A, policy
        self.tau = tau_expr(g)
        self.B = CertReal.exact(g)
        first = first_q_exceeding(self.tau, 6 * M, policy)
        exp = cf_expand(self.tau, first.index + probes, policy)
        self.probes = exp.convergents[first.index: first.index + probes + 1]
        self.a_M, N = max_partial_quotient(self.tau, M, policy)
        self.legendre_conv = exp.convergents[N]
        self.lam = Fraction(1, (self.a_M + 2) * M)
        self.bits = self.probes[-1].q.bit_length() + M.bit_length() + 64
        tau_b = self.tau(self.bits)
        self.tau_err = [M * abs(tau_b * c.q - c.p) for c in self.probes]
        self._G = log_rational(g, self.bits + 16)
        self._comp: dict[int, CertReal] = {}
        base = 3 * self._c(g - 1)
        if kind is SequenceKind.FIBONACCI:
            base = base - log_rational(5, self.bits + 16) / (2 * self._G)
        self._base = base
        self._exact: ReductionOutcome | None = None

    def _c(self, x: int) -> CertReal:
        v = self._comp.get(x)
        if v is None:
            v = self._comp[x] = log_rational(x, self.bits + 16) / self._G
        return v

    def mu_ball(self, P: int, ell: int | None, m: int | None) -> CertReal:
        x = self._base - self._c(P)
        if ell is not None:
            x = x - self._c(self.g ** ell - 1)
        if m is not None:
            x = x - self._c(self.g ** m - 1)
        return x

    def mu_expr(self, P: int, ell: int | None, m: int | None) -> RealExpr:
        g, kind = self.g, self.kind
        parts = [f"log((g-1)^3/{P}"]
        if ell is not None:
            parts.append(f"/(g^{ell}-1)")
        if m is not None:
            parts.append(f"/(g^{m}-1)")
        root = "/sqrt(5)" if kind is SequenceKind.FIBONACCI else ""
        desc = "".join(parts) + root + f")/log(g), g={g}"

        def evaluate(bits: int) -> CertReal:
            b = bits + 16
            x = 3 * log_rational(g - 1, b) - log_rational(P, b)
            if ell is not None:
                x = x - log_rational(g ** ell - 1, b)
            if m is not None:
                x = x - log_rational(g ** m - 1, b)
            if kind is SequenceKind.FIBONACCI:
                x = x - log_rational(5, b) / 2
            return (x / log_rational(g, b)).with_prec(bits)

        return RealExpr(desc, evaluate)

    def exact_outcome(self) -> ReductionOutcome:
        if self._exact is None:
            self._exact = ReductionOutcome(
                ReductionMethod.LEGENDRE, _log_bound(self.A * ((self.a_M + 2) * self.M), self.B),
                self.legendre_conv, a_M=self.a_M, mu_gap=CertReal.exact(0))
        return self._exact

    def reduce(self, P: int, ell: int | None, m: int | None) -> ReductionOutcome:
        """Best sound bound for one member; see :func:`reduce_one`."""
        g = self.g
        den = P * (g ** ell - 1 if ell else 1) * (g ** m - 1 if m else 1)
        if self.kind is SequenceKind.LUCAS and exact_power_of(Fraction((g - 1) ** 3, den), g) is not None:
            return self.exact_outcome()
        mu = self.mu_ball(P, ell, m)
        near = None
        gap = _dist_to_int(mu)
        if gap.upper() < self.lam:
            room = self.lam - gap.upper()
            near = ReductionOutcome(ReductionMethod.LEGENDRE, _log_bound(self.A / room, self.B),
                                    self.legendre_conv, a_M=self.a_M, mu_gap=gap)
        dp = None
        undecided = False
        for j, conv in enumerate(self.probes):
            eps = _dist_to_int(mu * conv.q) - self.tau_err[j]
            if eps.is_positive():
                dp = ReductionOutcome(ReductionMethod.DUJELLA_PETHO, _log_bound(self.A * conv.q / eps, self.B),
                                      conv, epsilon=eps, probes=j + 1)
                break
            if eps.upper() > 0:
                undecided = True
        if dp is None and undecided:
            # slow path with precision escalation
            prob = ReductionProblem(self.tau, self.mu_expr(P, ell, m), self.A, self.B, self.M)
            try:
                dp = dujella_petho_reduce(prob, len(self.probes) - 1, self.policy)
            except NoPositiveEpsilon:
                dp = None
        if dp is None:
            if near is None:
                raise NoPositiveEpsilon(
                    f"epsilon <= 0 for {len(self.probes)} convergents past q > 6M "
                    f"(P={P}, ell={ell}, m={m}, g={g})")
            return near
        if near is not None and near.w_bound < dp.w_bound:
            return near
        return dp


def exact_power_of(r: Fraction, g: int) -> int | None:
    """b with r == g^b, or None."""
    if r.numerator == 1:
        x, sign = r.denominator, -1
    elif r.denominator == 1:
        x, sign = r.numerator, 1
    else:
        return None
    b = 0
    while x % g == 0:
        x //= g
        b += 1
    return sign * b if x == 1 else None


def digit_products(g: int) -> dict[int, tuple[int, int, int]]:
    """Distinct d1 d2 d3 with a representative sorted triple."""
    out: dict[int, tuple[int, int, int]] = {}
    for t in itertools.combinations_with_replacement(range(1, g), 3):
        out.setdefault(t[0] * t[1] * t[2], t)
    return out


@dataclass(frozen=True)
class FamilyMember:
    digits: tuple[int, int, int]
    ell: int | None
    m: int | None
    outcome: ReductionOutcome

    def to_json(self) -> dict:
        return {"digits": list(self.digits), "ell": self.ell, "m": self.m, "outcome": self.outcome.to_json()}


@dataclass(frozen=True)
class StageReduction:
    kind: SequenceKind
    g: int
    stage: int
    M: int
    A: CertReal
    w_min: int
    bridge_c: Fraction
    w_bound: int                 # max over the family, before the w_min floor
    bound: int                   # resulting cap on ell (stage 1), m (stage 2) or n (stage 3)
    worst: FamilyMember | None
    min_epsilon: FamilyMember | None
    legendre_members: tuple[FamilyMember, ...] = field(default_factory=tuple)
    problems: int = 0
    dp_count: int = 0
    legendre_count: int = 0

    def to_json(self) -> dict:
        return {
            "stage": self.stage,
            "M": str(self.M),
            "A": _ball_json(self.A),
            "w_min": self.w_min,
            "bridge_c": str(self.bridge_c),
            "w_bound": self.w_bound,
            "bound": self.bound,
            "worst": self.worst.to_json() if self.worst else None,
            "min_epsilon": self.min_epsilon.to_json() if self.min_epsilon else None,
            "legendre_members": [m.to_json() for m in self.legendre_members],
            "problems": self.problems,
            "dujella_petho": self.dp_count,
            "legendre": self.legendre_count,
        }


def _family(g: int, stage: int, already_reduced: dict[str, int]):
    """(P, ell, m) combinations whose mu must be reduced."""
    if stage == 1:
        return [(None, None)]
    ell_max = already_reduced["ell"]
    if stage == 2:
        return [(ell, None) for ell in range(1, ell_max + 1)]
    m_max = already_reduced["m"]
    return [(ell, m) for ell in range(1, ell_max + 1) for m in range(ell, m_max + 1)]


def reduce_one(kind: SequenceKind, g: int, P: int, ell: int | None, m: int | None, A: CertReal, M: int,
               policy: PrecisionPolicy = DEFAULT_POLICY, probes: int = DEFAULT_PROBES,
               context: StageContext | None = None) -> ReductionOutcome:
    """Route one shift mu and keep the best sound bound.

    Lucas shifts with (g-1)^3 / (P (g^l-1) (g^m-1)) an exact power of g go to the
    Legendre criterion.  Everything else tries Dujella-Petho, and also the
    Legendre criterion when mu is within 1/((a(M)+2) M) of an integer.
    """
    ctx = context or StageContext(kind, g, M, A, policy, probes)
    return ctx.reduce(P, ell, m)


def reduce_stage(kind: SequenceKind, g: int, stage: int, M: int, already_reduced: dict[str, int] | None = None,
                 policy: PrecisionPolicy = DEFAULT_POLICY, a_override: Fraction | None = None,
                 probes: int = DEFAULT_PROBES) -> StageReduction:
    """Reduce every (digit product, exponent) member of the stage and aggregate by maximum."""
    already_reduced = already_reduced or {}
    if stage not in (1, 2, 3):
        raise ValueError("stage must be 1, 2 or 3")
    w_min, c = bridge(g, stage)
    A = stage_A(g, stage)
    if a_override is not None:
        if Fraction(a_override) < A.upper():
            raise ValueError(f"A = {a_override} is smaller than the certified {float(A):.6g}")
        A = CertReal.exact(Fraction(a_override))
    ctx = StageContext(kind, g, M, A, policy, probes)
    products = digit_products(g)
    seen: set[Fraction] = set()
    worst: FamilyMember | None = None
    min_eps: FamilyMember | None = None
    legendre: list[FamilyMember] = []
    dp_count = 0
    for ell, m in _family(g, stage, already_reduced):
        for P, triple in products.items():
            den = P * (g ** ell - 1 if ell else 1) * (g ** m - 1 if m else 1)
            r = Fraction((g - 1) ** 3, den)
            if r in seen:
                continue
            seen.add(r)
            try:
                out = ctx.reduce(P, ell, m)
            except NoPositiveEpsilon as exc:
                raise NoPositiveEpsilon(f"stage {stage}, digits {triple}: {exc}", stage=f"stage {stage}") from exc
            member = FamilyMember(triple, ell, m, out)
            if out.method is ReductionMethod.LEGENDRE:
                legendre.append(member)
            else:
                dp_count += 1
                if min_eps is None or out.epsilon.upper() < min_eps.outcome.epsilon.upper():
                    min_eps = member
            if worst is None or out.w_bound > worst.outcome.w_bound:
                worst = member
    w_bound = worst.outcome.w_bound if worst else 0
    w_final = max(w_bound, w_min - 1)
    bound = w_final + 1 if stage == 3 else w_final
    return StageReduction(kind, g, stage, M, A, w_min, c, w_bound, max(bound, 1), worst, min_eps,
                          tuple(legendre), len(seen), dp_count, len(legendre))


def reduce_stage_over_triples(kind: SequenceKind, g: int, stage: int, M: int,
                              already_reduced: dict[str, int] | None = None,
                              policy: PrecisionPolicy = DEFAULT_POLICY) -> int:
    """The stage's reduced cap: on ell (stage 1), m (stage 2) or n (stage 3)."""
    return reduce_stage(kind, g, stage, M, already_reduced, policy).bound
