from fractions import Fraction

import mpmath
import pytest

from repfib.certreal import CertReal, golden_expr, quadratic_surd_expr, tau_expr
from repfib.errors import NoPositiveEpsilon
from repfib.reduction import (
    ReductionMethod,
    ReductionOutcome,
    ReductionProblem,
    StageContext,
    bridge,
    digit_products,
    dujella_petho_reduce,
    exact_power_of,
    legendre_reduce,
    reduce_stage,
    stage_A,
)
from repfib.sequences import SequenceKind

from oracles import dp_soundness_run, no_solution_beyond, rational_expr

F, L = SequenceKind.FIBONACCI, SequenceKind.LUCAS


@pytest.fixture(autouse=True, scope="module")
def _mp_precision():
    with mpmath.workprec(400):
        yield


# -- synthetic problems -------------------------------------------------------------------------


def test_synthetic_golden_third():
    prob = ReductionProblem(golden_expr(), rational_expr(Fraction(1, 3)), CertReal.exact(1), CertReal.exact(2), 10)
    out = dujella_petho_reduce(prob)
    assert out.method is ReductionMethod.DUJELLA_PETHO and out.epsilon.is_positive()
    assert out.convergent_used.q > 60
    phi = (1 + mpmath.sqrt(5)) / 2
    # grid of the statement: k <= 10, |N| <= ceil(10 tau) + 1, w <= w_bound + 1
    for k in range(1, 11):
        for N in range(0, int(mpmath.ceil(10 * phi)) + 2):
            d = abs(k * phi - N + mpmath.mpf(1) / 3)
            assert not (0 < d < mpmath.mpf(2) ** -(out.w_bound + 1))


def test_dp_soundness_randomized():
    accepted, failures = dp_soundness_run(seed=20240611, wanted=110)
    assert accepted >= 100 and not failures


def test_no_positive_epsilon_for_integer_shift():
    prob = ReductionProblem(golden_expr(), rational_expr(Fraction(0)), CertReal.exact(1), CertReal.exact(2), 10)
    with pytest.raises(NoPositiveEpsilon):
        dujella_petho_reduce(prob, max_convergent_probes=3)


def test_legendre_synthetic_golden():
    out = legendre_reduce(golden_expr(), 100, CertReal.exact(1), CertReal.exact(2))
    assert out.method is ReductionMethod.LEGENDRE and out.a_M == 1
    assert out.w_bound == 8  # 2^8 < 1 * 3 * 100 <= 2^9
    phi = (1 + mpmath.sqrt(5)) / 2
    assert no_solution_beyond(phi, mpmath.mpf(0), Fraction(1), 2, 100, out.w_bound)
    # the criterion itself: |phi - x/y| >= 1/((a+2) y^2) for all y <= 100
    for y in range(1, 101):
        x = mpmath.nint(y * phi)
        assert abs(phi - x / y) >= 1 / (3 * mpmath.mpf(y) ** 2)


def test_legendre_monotone_in_M():
    bounds = [legendre_reduce(tau_expr(10), M, CertReal.exact(Fraction(174, 10)), CertReal.exact(10)).w_bound
              for M in (10, 10**5, 10**12, 10**20, 10**35, 33 * 10**51)]
    assert bounds == sorted(bounds)


def test_dujella_petho_not_monotone_in_M():
    # a larger M may select a different convergent and a larger epsilon, so the bound can drop;
    # both answers are still sound, so only Legendre is held to monotonicity
    tau, mu = tau_expr(3), quadratic_surd_expr(1, 11, 9)
    A, B = CertReal.exact(Fraction(22, 5)), CertReal.exact(2)
    small = dujella_petho_reduce(ReductionProblem(tau, mu, A, B, 198), 8).w_bound
    large = dujella_petho_reduce(ReductionProblem(tau, mu, A, B, 594), 8).w_bound
    assert (small, large) == (19, 18)


def test_outcome_invariants():
    conv = None
    with pytest.raises(ValueError):
        ReductionOutcome(ReductionMethod.DUJELLA_PETHO, 3, conv, epsilon=CertReal.exact(-1))
    with pytest.raises(ValueError):
        ReductionOutcome(ReductionMethod.LEGENDRE, -1, conv)
    with pytest.raises(ValueError):
        ReductionProblem(golden_expr(), golden_expr(), CertReal.exact(1), CertReal.exact(1), 10)


# -- stage helpers ------------------------------------------------------------------------------


def test_bridge_constants():
    assert bridge(10, 1) == (1, Fraction(5))
    assert bridge(10, 2) == (1, Fraction(5, 3))
    assert bridge(10, 3) == (1, Fraction(5, 4))
    assert bridge(2, 1) == (4, Fraction(2))
    assert float(stage_A(10, 1)) < 17.4 and float(stage_A(10, 2)) < 3.5 and float(stage_A(10, 3)) < 1.8


def test_exact_power_of():
    assert exact_power_of(Fraction(1, 100), 10) == -2
    assert exact_power_of(Fraction(1000), 10) == 3
    assert exact_power_of(Fraction(1), 10) == 0
    assert exact_power_of(Fraction(2, 3), 10) is None
    assert exact_power_of(Fraction(729, 729), 10) == 0


def test_digit_products():
    prods = digit_products(10)
    assert set(prods) == {a * b * c for a in range(1, 10) for b in range(1, 10) for c in range(1, 10)}
    assert prods[729] == (9, 9, 9) and prods[1] == (1, 1, 1)


def test_override_below_certified_A_rejected():
    with pytest.raises(ValueError):
        reduce_stage(F, 10, 1, 10**10, a_override=Fraction(17))


# -- published stage families -------------------------------------------------------------------


def test_fibonacci_stage1_family():
    r = reduce_stage(F, 10, 1, 46 * 10**51, a_override=Fraction(174, 10))
    assert r.bound == 58
    assert float(r.min_epsilon.outcome.epsilon) == pytest.approx(0.00809526, abs=1e-8)
    assert r.worst.outcome.w_bound == r.w_bound
    assert r.worst.outcome.convergent_used.q == 7331928878186982501184370491249297952824659131062806099


def test_lucas_stage1_family():
    r = reduce_stage(L, 10, 1, 33 * 10**51, a_override=Fraction(174, 10))
    assert r.bound == 57
    assert float(r.min_epsilon.outcome.epsilon) == pytest.approx(0.0028639, abs=1e-7)
    (member,) = r.legendre_members
    assert member.digits == (9, 9, 9) and member.outcome.a_M == 106 and member.outcome.w_bound == 55


def test_fibonacci_stage2_family():
    r = reduce_stage(F, 10, 2, 3 * 10**35, {"ell": 58}, a_override=Fraction(35, 10))
    assert r.bound == 41
    assert float(r.min_epsilon.outcome.epsilon) == pytest.approx(0.000111931, rel=1e-5)
    assert r.worst.outcome.convergent_used.q == 5253306550332349137376600680873772748


def test_lucas_stage2_family():
    r = reduce_stage(L, 10, 2, 28 * 10**34, {"ell": 57}, a_override=Fraction(35, 10))
    assert r.bound <= 58
    legendre = {(m.ell, m.digits): m.outcome.w_bound for m in r.legendre_members}
    assert legendre[(1, (1, 9, 9))] == 38
    assert max(legendre.values()) == 38


def test_fibonacci_stage3_family():
    r = reduce_stage(F, 10, 3, 2 * 10**19, {"ell": 58, "m": 41}, a_override=Fraction(18, 10))
    assert r.bound == 26
    assert r.worst.outcome.w_bound == 25


def test_lucas_stage3_family():
    r = reduce_stage(L, 10, 3, 21 * 10**18, {"ell": 57, "m": 58}, a_override=Fraction(18, 10))
    assert r.bound == 27
    assert max(m.outcome.w_bound for m in r.legendre_members) + 1 == 22


# -- the two routes agree -----------------------------------------------------------------------


@pytest.mark.parametrize("kind", [F, L])
def test_context_path_matches_generic_path(kind):
    M = 3 * 10**35
    A = CertReal.exact(Fraction(35, 10))
    ctx = StageContext(kind, 10, M, A)
    checked = 0
    for ell in (1, 2, 7):
        for P in digit_products(10):
            out = ctx.reduce(P, ell, None)
            if out.method is not ReductionMethod.DUJELLA_PETHO:
                continue
            prob = ReductionProblem(ctx.tau, ctx.mu_expr(P, ell, None), A, CertReal.exact(10), M)
            ref = dujella_petho_reduce(prob)
            assert ref.convergent_used.index == out.convergent_used.index
            assert ref.w_bound == out.w_bound
            mu_ref = prob.mu(400)
            mu_ctx = ctx.mu_ball(P, ell, None)
            assert abs(mu_ref.midpoint - mu_ctx.midpoint) <= mu_ref.radius + mu_ctx.radius
            checked += 1
    assert checked >= 250
