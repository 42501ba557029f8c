"""End-to-end solver: global bounds, three reduction rounds, exhaustive search."""

from __future__ import annotations

import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

from .certreal import DEFAULT_POLICY, CertReal, PrecisionPolicy
from .linear_forms import (
    BoundCertificate,
    chain_constants,
    crude_k_cap,
    global_bounds,
    k_cap,
    n_bound_after_ell,
    n_bound_after_m,
)
from .reduction import StageReduction, reduce_stage
from .sequences import Repdigit, SequenceKind, Solution, seq_membership, seq_value


@dataclass(frozen=True)
class SearchBox:
    ell_max: int
    m_max: int
    n_max: int
    k_max: int

    def __post_init__(self) -> None:
        if min(self.ell_max, self.m_max, self.n_max, self.k_max) < 1:
            raise ValueError("box components must be >= 1")

    def effective(self) -> "SearchBox":
        """Same search space with ell <= m <= n enforced on the caps."""
        m = min(self.m_max, self.n_max)
        return SearchBox(min(self.ell_max, m), m, self.n_max, self.k_max)

    def to_json(self) -> dict:
        return {"ell_max": self.ell_max, "m_max": self.m_max, "n_max": self.n_max, "k_max": str(self.k_max)}


@dataclass(frozen=True)
class RoundRecord:
    """One reduction round and the bounds re-derived from its result."""

    stage: int
    reduction: StageReduction
    propagated: dict

    def to_json(self) -> dict:
        return {"stage": self.stage, "reduction": self.reduction.to_json(),
                "propagated": {k: _plain(v) for k, v in self.propagated.items()}}


def _plain(v):
    if isinstance(v, CertReal):
        mid, rad = v.to_decimal(20)
        return {"mid": mid, "rad": rad, "bits": v.prec}
    if isinstance(v, int) and not isinstance(v, bool):
        return str(v)
    return v


@dataclass(frozen=True)
class EnumerationStats:
    candidates: int
    shards: int
    seconds: float

    def to_json(self) -> dict:
        return {"candidates": self.candidates, "shards": self.shards, "seconds": round(self.seconds, 3)}


@dataclass(frozen=True)
class EnumerationResult:
    solutions: tuple[Solution, ...]
    out_of_convention: tuple[Solution, ...]
    stats: EnumerationStats


@dataclass(frozen=True)
class SolveReport:
    g: int
    kind: SequenceKind
    policy: PrecisionPolicy
    bound_certificate: BoundCertificate
    reduction_rounds: tuple[RoundRecord, ...]
    final_box: SearchBox
    solutions: tuple[Solution, ...]
    out_of_convention: tuple[Solution, ...]
    enumeration_stats: EnumerationStats
    single_length: tuple[Solution, ...] = field(default_factory=tuple)
    seconds: float = 0.0

    @property
    def values(self) -> list[int]:
        return sorted({s.value for s in self.solutions})


# -- enumeration --------------------------------------------------------------------------


def _repdigits(g: int, n_max: int) -> list[Repdigit]:
    # (length, digit) order is also value order within a base
    return [Repdigit(length, d, g) for length in range(1, n_max + 1) for d in range(1, g)]


def _classify(kind: SequenceKind, k_max: int, prod: int, factors, sols: list, odd: list) -> None:
    k = seq_membership(prod, kind)
    if k is not None and k <= k_max:
        sols.append(Solution.from_factors(kind, k, factors))
    elif kind is SequenceKind.LUCAS and prod == 2:
        odd.append(Solution.from_factors(kind, 0, factors))


def _scan_lengths(args) -> tuple[list[Solution], list[Solution], int]:
    """All canonical triples whose largest factor has length in ``lengths``."""
    g, kind_value, box, lengths = args
    kind = SequenceKind(kind_value)
    reps = _repdigits(g, box.n_max)
    vals = [r.value for r in reps]
    limit = seq_value(kind, box.k_max)
    sols: list[Solution] = []
    odd: list[Solution] = []
    count = 0
    for n in lengths:
        start = (n - 1) * (g - 1)
        third = range(start, start + g - 1)
        first_len = min(box.ell_max, n)
        second_len = min(box.m_max, n)
        for i, ri in enumerate(reps):
            if ri.length > first_len:
                break
            vi = vals[i]
            if vi * vi * vals[start] > limit:
                break
            for j in range(i, len(reps)):
                rj = reps[j]
                if rj.length > second_len:
                    break
                vij = vi * vals[j]
                if vij * vals[max(j, start)] > limit:
                    break
                for k in third:
                    if k < j:
                        continue
                    prod = vij * vals[k]
                    if prod > limit:
                        break
                    count += 1
                    _classify(kind, box.k_max, prod, (ri, rj, reps[k]), sols, odd)
    return sols, odd, count


def _order(sols) -> tuple[Solution, ...]:
    return tuple(sorted(set(sols), key=lambda s: (s.value, s.k, s.factors)))


def enumerate_box_detailed(g: int, kind: SequenceKind, box: SearchBox, shards: int = 1) -> EnumerationResult:
    if g < 2:
        raise ValueError("base must be >= 2")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    box = box.effective()
    t0 = time.perf_counter()
    lengths = list(range(1, box.n_max + 1))
    groups = [lengths[s::shards] for s in range(shards)]
    jobs = [(g, kind.value, box, grp) for grp in groups if grp]
    if shards == 1:
        parts = [_scan_lengths(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=shards) as pool:
            parts = list(pool.map(_scan_lengths, jobs))
    sols = [s for p in parts for s in p[0]]
    odd = [s for p in parts for s in p[1]]
    count = sum(p[2] for p in parts)
    stats = EnumerationStats(count, shards, time.perf_counter() - t0)
    return EnumerationResult(_order(sols), _order(odd), stats)


def enumerate_box(g: int, kind: SequenceKind, box: SearchBox | tuple[int, int, int, int],
                  shards: int = 1) -> set[Solution]:
    """Every witness with ell <= m <= n inside the box and 1 <= k <= k_max."""
    if not isinstance(box, SearchBox):
        box = SearchBox(*box)
    return set(enumerate_box_detailed(g, kind, box, shards).solutions)


def brute_force_oracle(g: int, kind: SequenceKind, k_limit: int, n_limit: int) -> set[Solution]:
    """Unpruned scan of all repdigit triples against a dict of sequence values."""
    index: dict[int, int] = {}
    for k in range(1, k_limit + 1):
        index.setdefault(seq_value(kind, k), k)
    reps = [Repdigit(length, d, g) for length in range(1, n_limit + 1) for d in range(1, g)]
    out = set()
    for trio in itertools.combinations_with_replacement(reps, 3):
        prod = trio[0].value * trio[1].value * trio[2].value
        k = index.get(prod)
        if k is not None:
            out.add(Solution.from_factors(kind, k, trio))
    return out


def verify_solution(s: Solution) -> bool:
    """Recompute both sides exactly."""
    try:
        if len(s.factors) != 3 or not all(isinstance(f, Repdigit) for f in s.factors):
            return False
        if len({f.base for f in s.factors}) != 1 or s.k < 0:
            return False
        prod = 1
        for f in s.factors:
            prod *= f.value
        return prod == s.value == seq_value(s.kind, s.k)
    except (TypeError, ValueError, AttributeError):
        return False


def single_length_prepass(g: int, kind: SequenceKind) -> tuple[Solution, ...]:
    """The case n = 1 (so ell = m = 1): the sequence value is a product of three digits."""
    box = SearchBox(1, 1, 1, k_cap(1, g, kind))
    return enumerate_box_detailed(g, kind, box).solutions


# -- pipeline ---------------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedBounds:
    certificate: BoundCertificate
    rounds: tuple[RoundRecord, ...]
    box: SearchBox


def reduce_bounds(g: int, kind: SequenceKind, policy: PrecisionPolicy = DEFAULT_POLICY,
                  a_overrides: dict[int, Fraction] | None = None) -> ReducedBounds:
    """Global bounds, then ell, m and n reductions with re-propagation after each."""
    if g < 2:
        raise ValueError("base must be >= 2")
    a_overrides = a_overrides or {}
    bits = max(256, policy.initial_bits)
    cert = global_bounds(g, kind, bits)
    cc = chain_constants(g, kind, bits)
    rounds: list[RoundRecord] = []

    s1 = reduce_stage(kind, g, 1, cert.k_max, policy=policy, a_override=a_overrides.get(1))
    ell_r = min(s1.bound, cert.n_max)
    H2, n2 = n_bound_after_ell(cc, ell_r)
    n2 = min(n2, cert.n_max)
    k2 = min(k_cap(n2, g, kind), cert.k_max)
    rounds.append(RoundRecord(1, s1, {"ell_max": ell_r, "H": H2, "n_max": n2, "k_max": k2,
                                      "lemma": "Guzman-Luca lemma, l = 2"}))

    s2 = reduce_stage(kind, g, 2, k2, {"ell": ell_r}, policy=policy, a_override=a_overrides.get(2))
    m_r = min(s2.bound, n2)
    H1, n3 = n_bound_after_m(cc, ell_r, m_r)
    n3 = min(n3, n2)
    k3 = min(k_cap(n3, g, kind), k2)
    rounds.append(RoundRecord(2, s2, {"m_max": m_r, "H": H1, "n_max": n3, "k_max": k3,
                                      "lemma": "Guzman-Luca lemma, l = 1"}))

    s3 = reduce_stage(kind, g, 3, k3, {"ell": min(ell_r, m_r), "m": m_r}, policy=policy,
                      a_override=a_overrides.get(3))
    n_r = min(s3.bound, n3)
    k_f = min(k_cap(n_r, g, kind), k3)
    rounds.append(RoundRecord(3, s3, {"n_max": n_r, "k_max": k_f, "crude_k_max": crude_k_cap(n_r, g)}))
    return ReducedBounds(cert, tuple(rounds), SearchBox(ell_r, m_r, n_r, k_f).effective())


def solve(g: int, kind: SequenceKind, policy: PrecisionPolicy = DEFAULT_POLICY, shards: int = 1,
          a_overrides: dict[int, Fraction] | None = None) -> SolveReport:
    """Certified complete list of sequence values that are products of three base-g repdigits."""
    if g < 2:
        raise ValueError("base must be >= 2")
    t0 = time.perf_counter()
    prepass = single_length_prepass(g, kind)
    red = reduce_bounds(g, kind, policy, a_overrides)
    result = enumerate_box_detailed(g, kind, red.box, shards)
    return SolveReport(g, kind, policy, red.certificate, red.rounds, red.box, result.solutions,
                       result.out_of_convention, result.stats, prepass, time.perf_counter() - t0)
