"""Command-line front end: matrix ingestion, scatteredness checks, synthetic
generation, and the experiment grid.

Exit codes for ``check``: 0 the condition holds, 1 it fails, 2 unknown
(deadline), 64+ usage or I/O errors (so shell pipelines can branch on the
verdict).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import FactorMatrix, Tolerances
from . import bnb, matio, oracle, ssc, synth

__all__ = ["main", "CheckRequest", "REPORT_SCHEMA"]

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NOINPUT = 66

# JSON schema of the check report; reports are validated against it in the
# test suite and documented in the README.
REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": [
        "verdict",
        "reason",
        "method",
        "label",
        "ncssc",
        "certificate",
        "certificate_verified",
        "pool",
        "q_star_bounds",
        "tolerances",
        "stats",
    ],
    "properties": {
        "verdict": {"enum": ["holds", "fails", "unknown"]},
        "reason": {
            "enum": [
                "ncssc_failed",
                "norm_exceeds_one",
                "extra_maximizer",
                "all_checks_passed",
                "deadline_reached",
            ]
        },
        "method": {"enum": ["bnb-pool", "oracle-exact"]},
        "label": {"type": "string"},
        "ncssc": {
            "type": ["object", "null"],
            "required": ["holds", "witnesses", "failure_index", "certificate"],
            "properties": {
                "holds": {"type": "boolean"},
                "witnesses": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
                "failure_index": {"type": ["integer", "null"]},
                "certificate": {"type": ["array", "null"], "items": {"type": "number"}},
            },
        },
        "certificate": {"type": ["array", "null"], "items": {"type": "number"}},
        "certificate_verified": {"type": ["boolean", "null"]},
        "pool": {"type": "array", "items": {"type": "array", "items": {"type": "number"}}},
        "q_star_bounds": {
            "type": ["array", "null"],
            "items": {"type": "number"},
            "minItems": 2,
            "maxItems": 2,
        },
        "tolerances": {"type": "object"},
        "stats": {"type": "object"},
        "matrix": {"type": "object"},
    },
}


@dataclass
class CheckRequest:
    """One matrix check: where the matrix comes from and how to run it."""

    input_path: str
    fmt: Optional[str] = None
    transpose: bool = False
    deadline: float = bnb.DEFAULT_DEADLINE
    method: str = "auto"
    stop_threshold: float = 1.0001
    json_path: Optional[str] = None
    workers: int = 1


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with the Unknown
    # verdict; remap to the sysexits usage code
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="sscheck",
        description="Check the sufficiently scattered condition of nonnegative matrices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="decide the condition for a matrix file")
    check.add_argument("--input", required=True, help="matrix file (rows of the file are rows of the matrix)")
    check.add_argument("--format", choices=["csv", "matrixmarket"], default=None,
                       help="input format (default: by file extension)")
    check.add_argument("--transpose", action="store_true",
                       help="check the transpose (e.g. a stored W whose W' is of interest)")
    check.add_argument("--deadline", type=float, default=bnb.DEFAULT_DEADLINE, metavar="SECONDS",
                       help="time budget before an 'unknown' verdict (default 300)")
    check.add_argument("--method", choices=["auto", "bnb", "oracle"], default="auto")
    check.add_argument("--stop-threshold", type=float, default=1.0001,
                       help="squared-norm early-stop value (default 1.0001)")
    check.add_argument("--json", dest="json_path", default=None, metavar="PATH",
                       help="write the full report as JSON ('-' for stdout)")

    gen = sub.add_parser("gen", help="generate a synthetic k-sparse matrix")
    gen.add_argument("--r", type=int, required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="output path")
    gen.add_argument("--format", choices=["csv", "matrixmarket"], default=None)

    exp = sub.add_parser("experiment", help="run the phase-transition grid")
    exp.add_argument("--r", default="3..6", help="ranks, e.g. 4 or 3..6 or 3,5,7")
    exp.add_argument("--k", default="1..5", help="sparsity levels, same syntax")
    exp.add_argument("--nmult", type=int, default=5, help="n = nmult * r (default 5)")
    exp.add_argument("--trials", type=int, default=20)
    exp.add_argument("--deadline", type=float, default=bnb.DEFAULT_DEADLINE, metavar="SECONDS")
    exp.add_argument("--seed", type=int, default=0, help="base seed; trial t uses seed+t")
    exp.add_argument("--csv", default=None, metavar="PATH", help="write records as CSV")
    exp.add_argument("--method", choices=["auto", "bnb", "oracle"], default="auto")
    return parser


def _parse_int_list(text: str) -> list[int]:
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif part:
            values.append(int(part))
    if not values:
        raise ValueError(f"empty integer list: {text!r}")
    return values


def _workers_from_env() -> int:
    raw = os.environ.get("SSC_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_check(req: CheckRequest) -> int:
    try:
        raw = matio.load_matrix(req.input_path, req.fmt)
    except FileNotFoundError:
        print(f"sscheck: cannot open {req.input_path}", file=sys.stderr)
        return EXIT_NOINPUT
    except matio.MatrixParseError as exc:
        print(f"sscheck: {exc}", file=sys.stderr)
        return EXIT_DATA
    if req.transpose:
        raw = raw.T
    try:
        H = FactorMatrix(raw)
    except ValueError as exc:
        print(f"sscheck: {req.input_path}: {exc}", file=sys.stderr)
        return EXIT_DATA
    tol = Tolerances(stop_threshold=req.stop_threshold)
    try:
        report = ssc.check_ssc(
            H, tol, req.deadline, method=req.method, workers=req.workers
        )
    except oracle.BudgetExceeded as exc:
        print(f"sscheck: {exc}", file=sys.stderr)
        return EXIT_USAGE
    payload = report.to_dict()
    payload["matrix"] = {"r": H.r, "n": H.n, "dropped_columns": list(H.dropped_columns)}
    if req.json_path == "-":
        json.dump(payload, sys.stdout, indent=2)
        print()
    else:
        if req.json_path:
            with open(req.json_path, "w") as fh:
                json.dump(payload, fh, indent=2)
        qlo, qhi = (report.q_star_bounds or (float("nan"), float("nan")))
        print(f"verdict: {report.verdict.value} ({report.label})")
        print(f"reason: {report.reason.value}; method: {report.method.value}")
        if report.q_star_bounds is not None:
            print(f"squared-norm bounds: [{qlo:.9g}, {qhi:.9g}]")
    return {
        ssc.Verdict.HOLDS: EXIT_HOLDS,
        ssc.Verdict.FAILS: EXIT_FAILS,
        ssc.Verdict.UNKNOWN: EXIT_UNKNOWN,
    }[report.verdict]


def cmd_gen(args) -> int:
    try:
        spec = synth.GenSpec(r=args.r, n=args.n, k=args.k, seed=args.seed)
    except ValueError as exc:
        print(f"sscheck: {exc}", file=sys.stderr)
        return EXIT_USAGE
    H = synth.generate(spec)
    try:
        matio.save_matrix(args.out, H.entries, args.format)
    except OSError as exc:
        print(f"sscheck: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_NOINPUT
    print(f"wrote {args.out}: r={spec.r} n={spec.n} k={spec.k} seed={spec.seed}")
    return 0


def cmd_experiment(args) -> int:
    try:
        r_list = _parse_int_list(args.r)
        k_list = _parse_int_list(args.k)
    except ValueError as exc:
        print(f"sscheck: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.trials < 1:
        print("sscheck: --trials must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    if args.nmult < 1:
        print("sscheck: --nmult must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    records = []

    def progress(rec):
        records.append(rec)
        print(
            f"r={rec.r} k={rec.k} n={rec.n}: ssc {rec.ssc_count}/{rec.trials}, "
            f"ncssc-not-ssc {rec.ncssc_not_ssc_count}, timeouts {rec.timeout_count}, "
            f"mean {rec.mean_time_s:.2f}s",
            flush=True,
        )
        if args.csv:
            synth.write_csv(records, args.csv)  # flush partial grids as we go

    try:
        synth.run_grid(
            r_list,
            k_list,
            args.nmult,
            args.trials,
            args.deadline,
            seed_base=args.seed,
            method=args.method,
            workers=_workers_from_env(),
            progress=progress,
        )
    except KeyboardInterrupt:
        print("interrupted; partial grid flushed", file=sys.stderr)
    print()
    print(synth.format_grid(records))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "check":
        req = CheckRequest(
            input_path=args.input,
            fmt=args.format,
            transpose=args.transpose,
            deadline=args.deadline,
            method=args.method,
            stop_threshold=args.stop_threshold,
            json_path=args.json_path,
            workers=_workers_from_env(),
        )
        return cmd_check(req)
    if args.command == "gen":
        return cmd_gen(args)
    if args.command == "experiment":
        return cmd_experiment(args)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
