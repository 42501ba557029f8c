"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

import functools

import pytest

from repfib.sequences import SequenceKind
from repfib.solver import solve

F, L = SequenceKind.FIBONACCI, SequenceKind.LUCAS

# filled by tests/test_acceptance.py, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def solved(g: int, kind: SequenceKind):
    """One full solve per (g, kind) for the whole session."""
    return solve(g, kind)


@pytest.fixture(scope="session")
def solve_cache():
    return solved


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
