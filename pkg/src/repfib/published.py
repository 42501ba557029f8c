"""Published numeric anchors for base 10 (and base 2), and a checker for them.

Convergent labels are the printed ordinal labels; in this package's 0-based
indexing each printed label ``t`` sits at index ``t - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .certreal import tau_expr
from .contfrac import cf_expand, max_partial_quotient
from .linear_forms import chain_constants, global_bounds, matveev_constant
from .reduction import reduce_stage
from .sequences import SequenceKind
from .solver import SearchBox, enumerate_box, solve

LABEL_OFFSET = 1

CONVERGENTS_BASE10 = {
    44: (259791952914951895804, 1243097211893507332887),
    77: (1097876139463713781430275039172749779, 5253306550332349137376600680873772748),
    97: (3106590240739929077205211403373423170367494081, 14864947214218067609395035403916715939116150260),
    114: (75199708224715672236920162770429633212096962359234385,
          359828495765425172949832316042466402419242364862312251),
    115: (1532282514732971248699360262855137347685624203086792614,
          7331928878186982501184370491249297952824659131062806099),
}

SOLUTIONS = {
    (10, SequenceKind.FIBONACCI): [1, 2, 3, 5, 8, 21, 55, 144],
    (10, SequenceKind.LUCAS): [1, 3, 4, 7, 11, 18],
    (2, SequenceKind.FIBONACCI): [1, 3, 21],
    (2, SequenceKind.LUCAS): [1, 3, 7],
}

K_MAX_BASE10 = {
    SequenceKind.FIBONACCI: Fraction(46, 10) * 10**52,
    SequenceKind.LUCAS: Fraction(33, 10) * 10**52,
}

# printed search boxes (ell, m, n, k) after reduction
BOXES_BASE10 = {
    SequenceKind.FIBONACCI: (58, 41, 26, 598),
    SequenceKind.LUCAS: (57, 58, 27, 621),
}

MATVEEV_PREFACTOR = Fraction(96974, 10**5) * 10**12
STAGE2_COEFF = Fraction(187, 100) * 10**13
A_M_LUCAS = 106
EPSILON_STAGE1 = {SequenceKind.FIBONACCI: Fraction(809526, 10**8), SequenceKind.LUCAS: Fraction(28639, 10**7)}
A_STAGE1 = Fraction(174, 10)


@dataclass(frozen=True)
class AnchorResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _rel_close(x: float, y: float, tol: float) -> bool:
    return abs(x - y) <= tol * abs(y)


def _anchor_prefactor() -> AnchorResult:
    # the printed 9.6974e11 is a 5-digit rounding; the 1e-6 tolerance is against the direct product
    c = float(matveev_constant(3, 2))
    direct = 1.4 * 30**6 * 3**4.5 * 4 * (1 + math.log(2))
    ok = _rel_close(c, direct, 1e-6) and f"{c:.4e}" == f"{float(MATVEEV_PREFACTOR):.4e}"
    return AnchorResult("Matveev prefactor 9.6974e11", ok, f"{c:.6e}")


def _anchor_stage2() -> AnchorResult:
    c = float(chain_constants(10, SequenceKind.FIBONACCI).c_m)
    return AnchorResult("stage-2 coefficient 1.87e13", _rel_close(c, float(STAGE2_COEFF), 0.01), f"{c:.5e}")


def _anchor_kmax(kind: SequenceKind) -> AnchorResult:
    bc = global_bounds(10, kind)
    return AnchorResult(f"{kind.value} g=10 k_max <= {float(K_MAX_BASE10[kind]):.2g}",
                        bc.k_max <= K_MAX_BASE10[kind], f"k_max = {bc.k_max:.4e}")


def _anchor_convergents() -> AnchorResult:
    exp = cf_expand(tau_expr(10), 120)
    bad = []
    for label, (p, q) in CONVERGENTS_BASE10.items():
        c = exp.convergents[label - LABEL_OFFSET]
        if (c.p, c.q) != (p, q):
            bad.append(label)
    return AnchorResult("convergents 44, 77, 97, 114, 115 exact", not bad,
                        "all found at index label-1" if not bad else f"mismatch at labels {bad}")


def _anchor_a_m() -> AnchorResult:
    a, n = max_partial_quotient(tau_expr(10), 33 * 10**51)
    a2, _ = max_partial_quotient(tau_expr(10), 21 * 10**18)
    return AnchorResult("Lucas a(M)=106", a == A_M_LUCAS and a2 == A_M_LUCAS, f"a(3.3e52) = {a}, a(2.1e19) = {a2}")


def _anchor_stage1(kind: SequenceKind) -> AnchorResult:
    M = int(K_MAX_BASE10[kind])
    r = reduce_stage(kind, 10, 1, M, a_override=A_STAGE1)
    eps = r.min_epsilon.outcome.epsilon
    expected = BOXES_BASE10[kind][0]
    ok = r.bound == expected and abs(float(eps) - float(EPSILON_STAGE1[kind])) < 1e-8
    return AnchorResult(f"{kind.value} stage-1 reduction ell <= {expected}", ok,
                        f"ell <= {r.bound}, min epsilon {float(eps):.6g} at digits {r.min_epsilon.digits}")


def _anchor_solutions(g: int, kind: SequenceKind, shards: int) -> AnchorResult:
    rep = solve(g, kind, shards=shards)
    want = SOLUTIONS[(g, kind)]
    return AnchorResult(f"{kind.value} g={g} solutions", rep.values == want, f"{rep.values}")


def _anchor_box(kind: SequenceKind) -> AnchorResult:
    ell, m, n, k = BOXES_BASE10[kind]
    vals = sorted({s.value for s in enumerate_box(10, kind, SearchBox(ell, m, n, k))})
    want = SOLUTIONS[(10, kind)]
    return AnchorResult(f"{kind.value} g=10 printed box gives same set", vals == want, f"{vals}")


def anchors(shards: int = 1) -> list[tuple[str, Callable[[], AnchorResult]]]:
    F, L = SequenceKind.FIBONACCI, SequenceKind.LUCAS
    return [
        ("prefactor", _anchor_prefactor),
        ("stage2", _anchor_stage2),
        ("kmax_fib", lambda: _anchor_kmax(F)),
        ("kmax_lucas", lambda: _anchor_kmax(L)),
        ("convergents", _anchor_convergents),
        ("a_m", _anchor_a_m),
        ("stage1_fib", lambda: _anchor_stage1(F)),
        ("stage1_lucas", lambda: _anchor_stage1(L)),
        ("box_fib", lambda: _anchor_box(F)),
        ("box_lucas", lambda: _anchor_box(L)),
        ("solutions_2_fib", lambda: _anchor_solutions(2, F, shards)),
        ("solutions_2_lucas", lambda: _anchor_solutions(2, L, shards)),
        ("solutions_10_fib", lambda: _anchor_solutions(10, F, shards)),
        ("solutions_10_lucas", lambda: _anchor_solutions(10, L, shards)),
    ]
