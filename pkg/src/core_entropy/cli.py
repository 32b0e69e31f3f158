"""Command-line front end: ``eval``, ``sweep`` and ``verify``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

from .angles import Angle, AngleError, farey_sequence, make_angle, parse_angle
from .checks import agreement_suite, cover_suite, exp_identity_suite, property_suite
from .engine import (
    DEFAULT_DEPTH,
    SWEEP_DEPTH,
    AngleComputationError,
    EntropyReport,
    compute_entropy,
    parse_methods,
)
from .spectral import Method

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILURE = 2
EXIT_IO = 3

DEPTH_ENV = "CORE_ENTROPY_DEPTH"
CSV_VERSION = "core-entropy sweep v1"
CSV_COLUMNS = ["theta_num", "theta_den", "theta_float", "h", "err", "method", "depth"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _env_depth(fallback: int) -> int:
    raw = os.environ.get(DEPTH_ENV)
    if raw is None:
        return fallback
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"{DEPTH_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"{DEPTH_ENV} must be positive")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="core-entropy", description="Core entropy of quadratic polynomials from external angles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate one angle")
    ev.add_argument("--angle", required=True, help="angle as num/den")
    ev.add_argument("--depth", type=_positive_int, help=f"truncation order (default {DEFAULT_DEPTH}, env {DEPTH_ENV})")
    ev.add_argument("--method", choices=["det", "matrix", "both"], default="both")
    ev.add_argument("--format", choices=["json", "csv", "text"], default="text")
    ev.add_argument("--precision", type=float, help="required enclosure width of the root; fail otherwise")

    sw = sub.add_parser("sweep", help="evaluate many angles and write CSV")
    src = sw.add_mutually_exclusive_group(required=True)
    src.add_argument("--farey", type=_positive_int, metavar="N", help="all reduced fractions with denominator <= N")
    src.add_argument("--angles", help="comma separated list of num/den")
    sw.add_argument("--depth", type=_positive_int, help=f"truncation order (default {SWEEP_DEPTH}, env {DEPTH_ENV})")
    sw.add_argument("--method", choices=["det", "matrix", "both"], default="matrix")
    sw.add_argument("--output", "-o", help="output file (default: standard output)")
    sw.add_argument("--jobs", "-j", type=_positive_int, default=1, help="worker processes")

    ve = sub.add_parser("verify", help="run the invariant suites")
    ve.add_argument("--max-denominator", type=int, default=16)
    ve.add_argument("--depth", type=_positive_int, help=f"truncation order (default {DEFAULT_DEPTH}, env {DEPTH_ENV})")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--wedges", type=_positive_int, default=20, help="random wedges per suite")
    return parser


# -- eval -------------------------------------------------------------------


def _text_report(report: EntropyReport) -> str:
    d = report.to_dict()
    lines = [f"theta      {d['theta']}  (period {d['period']}, preperiod {d['preperiod']})"]
    if d["h_det"] is not None:
        err = d["h_det_err"]
        lines.append(f"h_det      {d['h_det']!r}  +/- {'inf' if err is None else repr(err)}  (depth {d['depth']})")
    if d["h_eig"] is not None:
        lines.append(f"h_eig      {d['h_eig']!r}  +/- {d['h_eig_err']!r}")
    if d["agree"] is not None:
        lines.append(f"agree      {d['agree']}  (discrepancy {d['discrepancy']!r})")
    if d["flags"]:
        lines.append("flags      " + "; ".join(d["flags"]))
    return "\n".join(lines)


def _report_failed(report: EntropyReport) -> bool:
    if report.agree is False:
        return True
    return any(r.root_detected and not r.certified for r in report.results)


def cmd_eval(args, out) -> int:
    theta = parse_angle(args.angle)
    depth = args.depth or _env_depth(DEFAULT_DEPTH)
    report = compute_entropy(theta, depth, args.method, precision=args.precision)
    if args.format == "json":
        out.write(report.to_json() + "\n")
    elif args.format == "csv":
        out.write(_csv_text(_rows_for(report, depth)))
    else:
        out.write(_text_report(report) + "\n")
    return EXIT_FAILURE if _report_failed(report) else EXIT_OK


# -- sweep ------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else repr(x)


def _rows_for(report: EntropyReport, depth: int) -> list[list[str]]:
    rows = []
    for r in report.results:
        rows.append(
            [
                str(report.theta.numerator),
                str(report.theta.denominator),
                repr(float(report.theta)),
                _fmt(r.entropy),
                _fmt(r.entropy_err),
                r.method.value,
                str(depth if r.method is Method.SPECTRAL_DETERMINANT else 0),
            ]
        )
    return rows


def _csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def _sweep_one(task: tuple[int, int, int, str]) -> list[list[str]]:
    num, den, depth, method = task
    report = compute_entropy(Angle(num, den), depth, method)
    return _rows_for(report, depth)


def sweep_angles(angles: Sequence[Angle], depth: int, method: str, jobs: int = 1) -> list[list[str]]:
    """Rows for each angle, sorted by angle; identical for any ``jobs``."""
    parse_methods(method)
    ordered = sorted(set(angles), key=lambda a: a.fraction)
    tasks = [(a.numerator, a.denominator, depth, method) for a in ordered]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            # map yields in submission order, whatever order workers finish in
            chunks = list(pool.map(_sweep_one, tasks, chunksize=max(1, len(tasks) // (8 * jobs))))
    else:
        chunks = [_sweep_one(t) for t in tasks]
    return [row for chunk in chunks for row in chunk]


def cmd_sweep(args, out) -> int:
    depth = args.depth or _env_depth(SWEEP_DEPTH)
    if args.farey is not None:
        seq = list(farey_sequence(args.farey))
        angles = [make_angle(a, b) for a, b in seq]
    else:
        angles = [parse_angle(s) for s in args.angles.split(",") if s.strip()]
        if not angles:
            raise UsageError("--angles is empty")
        seq = None
    if seq is not None:
        # the Farey endpoint 1/1 is reported as its own row (value of 0/1)
        rows = sweep_angles(angles, depth, args.method, args.jobs)
        tail = [r for r in rows if r[0] == "0" and r[1] == "1"]
        rows += [["1", "1", "1.0"] + r[3:] for r in tail]
    else:
        rows = sweep_angles(angles, depth, args.method, args.jobs)
    text = _csv_text(rows)
    if args.output:
        try:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"core-entropy: cannot write {args.output}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
    else:
        out.write(text)
    return EXIT_OK


# -- verify -----------------------------------------------------------------


def cmd_verify(args, out) -> int:
    depth = args.depth or _env_depth(DEFAULT_DEPTH)
    suites = [
        ("cross-method agreement", lambda: agreement_suite(args.max_denominator, depth)),
        ("exp-trace identity", lambda: exp_identity_suite(args.seed, args.wedges, 8, min(args.max_denominator, 20))),
        ("closed-path properties", lambda: property_suite(args.seed, args.wedges, 10)),
        ("weak-cover inequalities", lambda: cover_suite(args.seed, args.wedges)),
    ]
    failed = 0
    for name, run in suites:
        rep = run()
        out.write(f"{name}: {rep.passed} passed, {rep.failed} failed\n")
        for f in rep.failures:
            out.write(f"  FAIL {f}\n")
        failed += rep.failed
    return EXIT_FAILURE if failed else EXIT_OK


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"eval": cmd_eval, "sweep": cmd_sweep, "verify": cmd_verify}[args.command]
        return handler(args, out)
    except (UsageError, AngleError) as exc:
        print(f"core-entropy: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AngleComputationError as exc:
        print(f"core-entropy: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
