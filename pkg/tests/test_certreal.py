from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repfib.certreal import (
    CertReal,
    Ordering,
    PrecisionPolicy,
    cr_compare,
    cr_dist_nearest_int,
    cr_log,
    cr_sqrt,
    escalate,
    from_decimal,
    golden_ratio,
    log_alpha,
    log_rational,
)
from repfib.errors import AmbiguousFloor, AmbiguousNearest, AmbiguousSign, PrecisionError, PrecisionExhausted



@pytest.fixture(autouse=True, scope="module")
def _mp_precision():
    with mpmath.workprec(512):
        yield


def mp_of(x: Fraction) -> mpmath.mpf:
    return mpmath.mpf(x.numerator) / x.denominator


def encloses(ball: CertReal, value: mpmath.mpf, slack_bits: int = 480) -> bool:
    """Containment against an oracle value carrying its own tiny error."""
    slack = mpmath.mpf(2) ** -slack_bits * max(1, abs(value))
    return abs(mp_of(ball.midpoint) - value) <= mp_of(ball.radius) + slack


positive = st.fractions(min_value=Fraction(1, 10**6), max_value=10**6)
anyfrac = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**9)
bits = st.integers(min_value=24, max_value=400)


# -- examples --------------------------------------------------------------------------


def test_log_one_is_zero():
    x = cr_log(1, 64)
    assert x.contains(0) and x.radius < Fraction(1, 2**60)


def test_log_ten_against_oracle():
    assert encloses(cr_log(10, 128), mpmath.log(10))
    assert cr_log(10, 128).contains(Fraction("2.302585092994045684017991454684364207601"))


def test_log_golden_ratio_against_oracle():
    phi = (1 + mpmath.sqrt(5)) / 2
    x = cr_log(golden_ratio(160), 128)
    assert encloses(x, mpmath.log(phi))
    assert abs(float(x) - 0.4812118250596034) < 1e-15
    assert encloses(log_alpha(128), mpmath.log(phi))


def test_log_radius_contract():
    for v in (2, 10, Fraction(7, 3), 10**40):
        x = cr_log(v, 128)
        assert x.radius <= Fraction(2) ** (-128 + 4) * abs(x.midpoint) + Fraction(2) ** -128


def test_log_rejects_ball_straddling_zero():
    with pytest.raises(AmbiguousSign):
        cr_log(CertReal.ball(0, Fraction(1, 10)))
    with pytest.raises(AmbiguousSign):
        cr_log(-3)


def test_dist_nearest_int_examples():
    d = cr_dist_nearest_int(CertReal.exact(3))
    assert d.contains(0) and d.is_exact()
    d = cr_dist_nearest_int(CertReal.ball(Fraction(11, 4), Fraction(1, 10**20)))
    assert d.contains(Fraction(1, 4)) and d.radius <= Fraction(2, 10**20)
    x = Fraction(499999999, 10**9)
    d = cr_dist_nearest_int(CertReal.ball(x, Fraction(1, 10**15)))
    assert d.contains(x) and d.radius < Fraction(1, 10**14)


def test_dist_nearest_int_needs_small_radius():
    with pytest.raises(AmbiguousNearest):
        cr_dist_nearest_int(CertReal.ball(0, Fraction(1, 4)))


def test_dist_nearest_int_straddling_half_is_still_valid():
    # the enclosure covers both sides of 1/2, so it must contain values near 1/2 from either side
    d = cr_dist_nearest_int(CertReal.ball(Fraction(1, 2), Fraction(1, 100)))
    assert d.contains(Fraction(1, 2)) and d.contains(Fraction(49, 100))


def test_compare_examples():
    assert cr_compare(CertReal.exact(1), CertReal.exact(2)) is Ordering.LESS
    x = CertReal.ball(Fraction(1, 3), Fraction(1, 10**6))
    assert cr_compare(x, x) is Ordering.UNKNOWN
    eps = from_decimal("0.00809526", "1e-12", 128)
    assert cr_compare(eps, CertReal.exact(0)) is Ordering.GREATER


def test_floor_and_nearest():
    assert CertReal.exact(Fraction(7, 2)).floor() == 3
    assert CertReal.exact(-Fraction(1, 3), 64).floor() == -1
    with pytest.raises(AmbiguousFloor):
        CertReal.ball(5, Fraction(1, 10)).floor()
    assert CertReal.ball(Fraction(26, 10), Fraction(1, 100)).nearest_int() == 3
    with pytest.raises(AmbiguousNearest):
        CertReal.ball(Fraction(5, 2), Fraction(1, 100)).nearest_int()


def test_sqrt_and_division_by_ambiguous_zero():
    assert encloses(cr_sqrt(5, 200), mpmath.sqrt(5))
    with pytest.raises(PrecisionError):
        CertReal.exact(1) / CertReal.ball(0, Fraction(1, 10))


def test_decimal_roundtrip_encloses():
    x = log_rational(10, 128)
    mid, rad = x.to_decimal(30)
    y = from_decimal(mid, rad, 128)
    assert y.lower() <= x.lower() and y.upper() >= x.upper()


def test_policy_validation_and_schedule():
    assert PrecisionPolicy().initial_bits == 192
    assert PrecisionPolicy().max_bits == 1_048_576
    assert list(PrecisionPolicy(64, 300).schedule()) == [64, 128, 256, 300]
    with pytest.raises(ValueError):
        PrecisionPolicy(initial_bits=512, max_bits=256)
    with pytest.raises(ValueError):
        PrecisionPolicy(escalation_factor=1)


def test_escalate_retries_then_gives_up():
    seen = []

    def needs_256(b):
        seen.append(b)
        if b < 256:
            raise AmbiguousFloor("more bits")
        return b

    assert escalate(needs_256, PrecisionPolicy(64, 1024)) == 256
    assert seen == [64, 128, 256]
    with pytest.raises(PrecisionExhausted):
        escalate(needs_256, PrecisionPolicy(64, 200))


def test_memo_refines_to_higher_precision():
    lo = log_alpha(128)
    hi = log_alpha(1024)
    assert hi.radius < lo.radius
    assert log_alpha(128).radius <= lo.radius


# -- properties ------------------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(anyfrac, anyfrac, bits)
def test_add_sub_mul_contain_exact(a, b, p):
    x, y = CertReal.exact(a, p), CertReal.exact(b, p)
    assert (x + y).contains(a + b)
    assert (x - y).contains(a - b)
    assert (x * y).contains(a * b)


@settings(max_examples=200, deadline=None)
@given(anyfrac, positive, bits)
def test_div_contains_exact(a, b, p):
    assert (CertReal.exact(a, p) / CertReal.exact(b, p)).contains(a / b)


@settings(max_examples=150, deadline=None)
@given(positive, st.integers(min_value=16, max_value=300))
def test_log_contains_high_precision_value(r, p):
    x = cr_log(r, p)
    hi = cr_log(r, 4 * p)
    assert abs(hi.midpoint - x.midpoint) <= x.radius + hi.radius
    assert encloses(x, mpmath.log(mp_of(r)))


@settings(max_examples=100, deadline=None)
@given(positive, st.integers(min_value=16, max_value=300))
def test_sqrt_contains_oracle(r, p):
    assert encloses(cr_sqrt(r, p), mpmath.sqrt(mp_of(r)))


@settings(max_examples=100, deadline=None)
@given(positive)
def test_refinement_never_widens(r):
    radii = [cr_log(r, p).radius for p in (32, 64, 128, 256)]
    assert radii == sorted(radii, reverse=True)


@settings(max_examples=200, deadline=None)
@given(anyfrac, st.integers(min_value=-10**9, max_value=10**9),
       st.fractions(min_value=0, max_value=Fraction(1, 5)))
def test_dist_nearest_int_translation_invariant(a, n, rad):
    x = CertReal.ball(a, rad, 128)
    d0 = cr_dist_nearest_int(x)
    d1 = cr_dist_nearest_int(x + n)
    assert abs(d0.midpoint - d1.midpoint) <= d0.radius + d1.radius
    assert 0 <= d0.midpoint <= Fraction(1, 2)
    true = abs(a - round(a))
    assert d0.contains(true)
