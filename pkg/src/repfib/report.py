"""JSON and text rendering of solve reports."""

from __future__ import annotations

import json

from .solver import SolveReport

SCHEMA_VERSION = 1


def report_to_json(report: SolveReport) -> dict:
    p = report.policy
    return {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "base": report.g,
            "kind": report.kind.value,
            "initial_bits": p.initial_bits,
            "max_bits": p.max_bits,
            "escalation_factor": p.escalation_factor,
            "shards": report.enumeration_stats.shards,
        },
        "bound_certificate": report.bound_certificate.to_json(),
        "reduction_rounds": [r.to_json() for r in report.reduction_rounds],
        "final_box": report.final_box.to_json(),
        "solutions": [s.to_json() for s in report.solutions],
        "out_of_convention": [s.to_json() for s in report.out_of_convention],
        "stats": {
            "values": [str(v) for v in report.values],
            "single_length_solutions": [s.to_json() for s in report.single_length],
            "enumeration": report.enumeration_stats.to_json(),
            "seconds": round(report.seconds, 3),
        },
    }


def dumps(obj) -> str:
    """Canonical serialization: insertion-ordered keys, two-space indent."""
    return json.dumps(obj, indent=2, ensure_ascii=True) + "\n"


def _digits(f) -> str:
    if f.base <= 10:
        return str(f.digit) * f.length
    return f"[{f.digit}]x{f.length}"


def report_text(report: SolveReport) -> str:
    box = report.final_box
    lines = [
        f"{report.kind.value} numbers that are products of three base-{report.g} repdigits",
        f"global bounds: n <= {report.bound_certificate.n_max:.4e}, k <= {report.bound_certificate.k_max:.4e}",
    ]
    for r in report.reduction_rounds:
        red = r.reduction
        worst = red.worst
        where = f"digits {worst.digits}" if worst else "-"
        if worst and worst.ell is not None:
            where += f", ell={worst.ell}"
        if worst and worst.m is not None:
            where += f", m={worst.m}"
        var = {1: "ell", 2: "m", 3: "n"}[r.stage]
        lines.append(f"round {r.stage}: M = {red.M:.4e}, {var} <= {red.bound} "
                     f"({red.problems} shifts, {red.legendre_count} via Legendre; worst {where})")
    lines.append(f"search box: ell <= {box.ell_max}, m <= {box.m_max}, n <= {box.n_max}, k <= {box.k_max}")
    lines.append(f"candidates tested: {report.enumeration_stats.candidates}")
    lines.append("solutions: " + ", ".join(str(v) for v in report.values))
    for s in report.solutions:
        fac = " * ".join(_digits(f) for f in s.factors)
        lines.append(f"  k={s.k}: {s.value} = {fac}")
    if report.out_of_convention:
        lines.append("outside k >= 1: " + ", ".join(f"k={s.k}: {s.value}" for s in report.out_of_convention))
    return "\n".join(lines) + "\n"
