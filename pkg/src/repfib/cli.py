"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 computational failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .certreal import PrecisionPolicy, tau_expr
from .contfrac import cf_expand
from .errors import RepfibError
from .linear_forms import global_bounds
from .report import dumps, report_text, report_to_json
from .sequences import SequenceKind
from .solver import reduce_bounds, solve

EXIT_OK, EXIT_USAGE, EXIT_FAILURE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    command: str
    base: int
    kind: SequenceKind
    precision_bits: int
    max_bits: int
    output: str | None
    fmt: str
    shards: int
    count: int = 10
    target: str = "tau"

    def __post_init__(self) -> None:
        if self.base < 2:
            raise UsageError(f"--base must be >= 2, got {self.base}")
        if self.shards < 1:
            raise UsageError(f"--shards must be >= 1, got {self.shards}")
        if self.count < 0:
            raise UsageError(f"--count must be >= 0, got {self.count}")

    @property
    def policy(self) -> PrecisionPolicy:
        try:
            return PrecisionPolicy(initial_bits=self.precision_bits, max_bits=self.max_bits)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--base", type=int, default=10, help="base g >= 2 (default 10)")
    common.add_argument("--kind", default="fibonacci", choices=[k.value for k in SequenceKind])
    common.add_argument("--precision-bits", type=int, default=192, help="initial working precision")
    common.add_argument("--max-bits", type=int, default=1_048_576, help="precision ceiling")
    common.add_argument("--shards", type=int, default=1, help="worker processes for the final search")
    common.add_argument("--output", help="write to this file instead of standard output")
    common.add_argument("--format", dest="fmt", default="json", choices=["json", "text"])

    parser = _Parser(prog="repfib", description="Fibonacci and Lucas numbers as products of three repdigits.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("solve", parents=[common], help="run the full pipeline and list all solutions")
    sub.add_parser("bounds", parents=[common], help="unconditional bounds on n and k")
    sub.add_parser("reduce", parents=[common], help="global bounds plus the three reduction rounds")
    conv = sub.add_parser("convergents", parents=[common], help="continued fraction of log(alpha)/log(g)")
    conv.add_argument("--count", type=int, default=10, help="number of convergents to print")
    conv.add_argument("--target", default="tau", choices=["tau"], help="tau = log(alpha)/log(base)")
    sub.add_parser("verify-paper", parents=[common], help="check the published base-10 and base-2 anchors")
    return parser


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_solve(cfg: RunConfig) -> int:
    rep = solve(cfg.base, cfg.kind, cfg.policy, shards=cfg.shards)
    _emit(cfg, dumps(report_to_json(rep)) if cfg.fmt == "json" else report_text(rep))
    return EXIT_OK


def cmd_bounds(cfg: RunConfig) -> int:
    cert = global_bounds(cfg.base, cfg.kind, max(256, cfg.precision_bits))
    if cfg.fmt == "json":
        _emit(cfg, dumps(cert.to_json()))
    else:
        lines = [f"{e.name} [{e.reference}]" for e in cert.trace]
        lines.append(f"n_max = {cert.n_max}")
        lines.append(f"k_max = {cert.k_max}")
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_reduce(cfg: RunConfig) -> int:
    red = reduce_bounds(cfg.base, cfg.kind, cfg.policy)
    if cfg.fmt == "json":
        _emit(cfg, dumps({"bound_certificate": red.certificate.to_json(),
                          "reduction_rounds": [r.to_json() for r in red.rounds],
                          "final_box": red.box.to_json()}))
    else:
        lines = [f"round {r.stage}: M = {r.reduction.M}, bound = {r.reduction.bound}" for r in red.rounds]
        b = red.box
        lines.append(f"box: ell <= {b.ell_max}, m <= {b.m_max}, n <= {b.n_max}, k <= {b.k_max}")
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_convergents(cfg: RunConfig) -> int:
    rows = []
    if cfg.count > 0:
        rows = list(cf_expand(tau_expr(cfg.base), cfg.count - 1, cfg.policy).convergents[: cfg.count])
    if cfg.fmt == "json":
        _emit(cfg, dumps({"target": tau_expr(cfg.base).description, "convergents": [c.to_json() for c in rows]}))
    else:
        _emit(cfg, "".join(f"{c.index}\t{c.partial_quotient}\t{c.p}\t{c.q}\n" for c in rows))
    return EXIT_OK


def cmd_verify_paper(cfg: RunConfig) -> int:
    from .published import anchors

    failed = 0
    lines = []
    for _, check in anchors(cfg.shards):
        res = check()
        failed += not res.passed
        lines.append(res.line())
        if not cfg.output:
            print(res.line(), flush=True)
    if cfg.output:
        _emit(cfg, "\n".join(lines) + "\n")
    return EXIT_OK if failed == 0 else EXIT_FAILURE


COMMANDS = {
    "solve": cmd_solve,
    "bounds": cmd_bounds,
    "reduce": cmd_reduce,
    "convergents": cmd_convergents,
    "verify-paper": cmd_verify_paper,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            command=args.command, base=args.base, kind=SequenceKind.parse(args.kind),
            precision_bits=args.precision_bits, max_bits=args.max_bits, output=args.output,
            fmt=args.fmt, shards=args.shards, count=getattr(args, "count", 10),
            target=getattr(args, "target", "tau"))
        cfg.policy
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"repfib: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[cfg.command](cfg)
    except RepfibError as exc:
        print(f"repfib: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"repfib: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
