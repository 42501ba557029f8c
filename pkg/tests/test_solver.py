import itertools
import json

import pytest

from repfib.report import report_to_json
from repfib.sequences import Repdigit, SequenceKind, Solution
from repfib.solver import (
    SearchBox,
    brute_force_oracle,
    enumerate_box,
    enumerate_box_detailed,
    single_length_prepass,
    solve,
    verify_solution,
)

from conftest import solved

F, L = SequenceKind.FIBONACCI, SequenceKind.LUCAS


def rd(length, digit, base=10):
    return Repdigit(length, digit, base)


@pytest.mark.parametrize("g, kind, k_limit, n_limit", [(10, F, 60, 5), (3, L, 30, 4), (2, F, 30, 6), (7, L, 120, 6)])
def test_oracle_examples(g, kind, k_limit, n_limit):
    box = SearchBox(n_limit, n_limit, n_limit, k_limit)
    assert enumerate_box(g, kind, box) == brute_force_oracle(g, kind, k_limit, n_limit)


def test_oracle_base2_subset():
    assert {s.value for s in brute_force_oracle(2, F, 30, 6)} <= {1, 3, 21}


def test_base2_single_length_box():
    res = enumerate_box_detailed(2, F, SearchBox(1, 1, 1, 10))
    assert res.stats.candidates == 1 and [s.value for s in res.solutions] == [1]


def test_verify_solution_examples():
    assert verify_solution(Solution.from_factors(F, 10, (rd(1, 5), rd(2, 1), rd(1, 1))))
    assert verify_solution(Solution.from_factors(L, 6, (rd(1, 2), rd(1, 3), rd(1, 3))))
    assert not verify_solution(Solution.from_factors(F, 4, (rd(1, 1), rd(1, 1), rd(1, 2))))
    mixed = Solution(F, 3, (rd(1, 1), rd(1, 1), rd(1, 2, 3)), 2)
    assert not verify_solution(mixed)
    assert not verify_solution("not a solution")


def test_canonical_order_idempotent():
    base = (rd(1, 9), rd(1, 2), rd(1, 8))
    sols = {Solution.from_factors(F, 12, p) for p in itertools.permutations(base)}
    assert len(sols) == 1


def test_shards_agree():
    box = SearchBox(6, 6, 6, 150)
    one = enumerate_box_detailed(10, L, box, shards=1)
    two = enumerate_box_detailed(10, L, box, shards=2)
    assert one.solutions == two.solutions and one.stats.candidates == two.stats.candidates


def test_single_length_prepass():
    assert sorted({s.value for s in single_length_prepass(10, F)}) == [1, 2, 3, 5, 8, 21, 144]
    assert sorted({s.value for s in single_length_prepass(2, L)}) == [1]
    assert all(s.exponents == (1, 1, 1) for s in single_length_prepass(10, L))


def test_invalid_inputs():
    with pytest.raises(ValueError):
        SearchBox(0, 1, 1, 1)
    with pytest.raises(ValueError):
        enumerate_box_detailed(10, F, SearchBox(1, 1, 1, 1), shards=0)
    with pytest.raises(ValueError):
        solve(1, F)


def test_effective_box_respects_ordering():
    assert SearchBox(58, 41, 26, 598).effective() == SearchBox(26, 26, 26, 598)


def strip_timing(obj):
    if isinstance(obj, dict):
        return {k: strip_timing(v) for k, v in obj.items() if k != "seconds"}
    if isinstance(obj, list):
        return [strip_timing(v) for v in obj]
    return obj


def test_deterministic_reports():
    a = report_to_json(solve(2, L))
    b = report_to_json(solve(2, L))
    assert json.dumps(strip_timing(a)) == json.dumps(strip_timing(b))


@pytest.mark.parametrize("g, kind, want", [(2, F, [1, 3, 21]), (2, L, [1, 3, 7]), (3, F, [1, 2, 8, 13]), (3, L, [1, 4])])
def test_small_bases(g, kind, want):
    assert solved(g, kind).values == want


@pytest.mark.parametrize("kind", [F, L])
def test_base10_report_consistency(kind):
    rep = solved(10, kind)
    assert all(verify_solution(s) for s in rep.solutions)
    rounds = {r.stage: r.propagated for r in rep.reduction_rounds}
    box = rep.final_box
    assert box.n_max == min(rounds[3]["n_max"], rounds[2]["n_max"], rep.bound_certificate.n_max)
    assert box.ell_max <= box.m_max <= box.n_max
    assert box.k_max == rounds[3]["k_max"]
    # the box collapses under ell <= m <= n, as in the printed search
    assert box.ell_max == box.m_max == box.n_max


def test_base10_witnesses():
    fib = solved(10, F)
    assert Solution.from_factors(F, 12, (rd(1, 2), rd(1, 8), rd(1, 9))) in fib.solutions
    assert Solution.from_factors(F, 10, (rd(1, 1), rd(1, 5), rd(2, 1))) in fib.solutions
    luc = solved(10, L)
    assert Solution.from_factors(L, 6, (rd(1, 1), rd(1, 2), rd(1, 9))) in luc.solutions
    # L_0 = 2 = 1 * 1 * 2 is kept apart from the k >= 1 solutions
    assert [s.k for s in luc.out_of_convention] == [0]
    assert 2 not in luc.values
