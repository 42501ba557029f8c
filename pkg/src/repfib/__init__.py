"""Fibonacci and Lucas numbers that are products of three base-g repdigits.

The pipeline bounds the exponents with Matveev's theorem, shrinks the bounds
with continued-fraction reductions and finishes with an exhaustive search.
Every numeric decision is made on certified enclosures.
"""

from .certreal import CertReal, PrecisionPolicy
from .contfrac import Convergent, cf_expand, first_q_exceeding, max_partial_quotient
from .errors import (
    HeightCheckFailed,
    HypothesisFailed,
    InvalidRepdigit,
    NoPositiveEpsilon,
    PrecisionError,
    PrecisionExhausted,
    RepfibError,
    ZeroDenominator,
)
from .linear_forms import BoundCertificate, global_bounds, k_cap
from .reduction import dujella_petho_reduce, legendre_reduce, reduce_stage_over_triples
from .sequences import Repdigit, SequenceKind, Solution, seq_membership, seq_value
from .solver import SearchBox, SolveReport, brute_force_oracle, enumerate_box, solve, verify_solution

__version__ = "0.1.0"

__all__ = [
    "BoundCertificate", "CertReal", "Convergent", "HeightCheckFailed", "HypothesisFailed",
    "InvalidRepdigit", "NoPositiveEpsilon", "PrecisionError", "PrecisionExhausted", "PrecisionPolicy",
    "Repdigit", "RepfibError", "SearchBox", "SequenceKind", "Solution", "SolveReport", "ZeroDenominator",
    "brute_force_oracle", "cf_expand", "dujella_petho_reduce", "enumerate_box", "first_q_exceeding",
    "global_bounds", "k_cap", "legendre_reduce", "max_partial_quotient", "reduce_stage_over_triples",
    "seq_membership", "seq_value", "solve", "verify_solution",
]
