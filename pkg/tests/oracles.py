"""Independent oracles shared by the reduction tests and the acceptance suite."""

from __future__ import annotations

import random
from fractions import Fraction

import mpmath

from repfib.certreal import CertReal, RealExpr, quadratic_surd_expr, tau_expr
from repfib.errors import NoPositiveEpsilon
from repfib.reduction import ReductionProblem, dujella_petho_reduce

ORACLE_PREC = 400


def rational_expr(x: Fraction) -> RealExpr:
    return RealExpr(f"rational {x}", lambda b: CertReal.exact(x, b))


def surd_mp(a: int, b: int, c: int) -> mpmath.mpf:
    return (a + mpmath.sqrt(b)) / c


@mpmath.workprec(ORACLE_PREC)
def no_solution_beyond(tau, mu, A: Fraction, B: int, M: int, w_bound: int) -> bool:
    """Exhaustive scan: 0 < |k tau - N + mu| < A B^-w has no solution with w > w_bound, k <= M."""
    threshold = mpmath.mpf(A.numerator) / A.denominator * mpmath.mpf(B) ** -(w_bound + 1)
    for k in range(1, M + 1):
        v = k * tau + mu
        for N in (mpmath.floor(v), mpmath.floor(v) + 1):
            d = abs(v - N)
            if 0 < d < threshold:
                return False
    return True


def random_problem(rng: random.Random):
    """A small problem with tau and mu known to an independent oracle."""
    if rng.random() < 0.5:
        a, b, c = rng.randint(0, 9), rng.choice([2, 3, 5, 6, 7, 10, 11, 13, 17, 19, 21]), rng.randint(1, 5)
        tau, tau_mp = quadratic_surd_expr(a, b, c), surd_mp(a, b, c)
    else:
        g = rng.randint(2, 20)
        tau, tau_mp = tau_expr(g), mpmath.log((1 + mpmath.sqrt(5)) / 2) / mpmath.log(g)
    if rng.random() < 0.5:
        x = Fraction(rng.randint(1, 997), rng.randint(2, 1009))
        mu, mu_mp = rational_expr(x), mpmath.mpf(x.numerator) / x.denominator
    else:
        a, b, c = rng.randint(0, 5), rng.choice([2, 3, 5, 7, 11]), rng.randint(2, 9)
        mu, mu_mp = quadratic_surd_expr(a, b, c), surd_mp(a, b, c)
    A = Fraction(rng.randint(1, 400), 20)
    B = rng.choice([2, 3, 5, 10])
    M = rng.randint(5, 300)
    return ReductionProblem(tau, mu, CertReal.exact(A), CertReal.exact(B), M), tau_mp, mu_mp, A, B


@mpmath.workprec(ORACLE_PREC)
def dp_soundness_run(seed: int, wanted: int, max_trials: int = 400) -> tuple[int, list[str]]:
    """(accepted problems, failures) for randomized Dujella-Petho runs checked by exhaustive scan."""
    rng = random.Random(seed)
    accepted, failures, trials = 0, [], 0
    while accepted < wanted and trials < max_trials:
        trials += 1
        prob, tau_mp, mu_mp, A, B = random_problem(rng)
        try:
            out = dujella_petho_reduce(prob, max_convergent_probes=8)
        except NoPositiveEpsilon:
            continue
        accepted += 1
        if out.convergent_used.q <= 6 * prob.M or not no_solution_beyond(tau_mp, mu_mp, A, B, prob.M, out.w_bound):
            failures.append(f"{prob.tau.description} {prob.mu.description} A={A} B={B} M={prob.M}")
    return accepted, failures
