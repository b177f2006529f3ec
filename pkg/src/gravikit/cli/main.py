"""Command line: ``gravikit validate|run|sweep|topology``.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 numerical or internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import ConfigError, GravikitError, NumericError
from .config import load_config
from .report import EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERIC, EXIT_OK, _clean, checks_csv, export, run_suite, \
    sweep_csv, to_json  # noqa: F401
from .suites import SUITES, topology_record


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gravikit", description="Gibbons-Hawking gluing data and its verification")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="parse a scene file and echo it with defaults filled in")
    v.add_argument("config")

    r = sub.add_parser("run", help="run a verification suite")
    r.add_argument("--suite", required=True, choices=SUITES + ("all",))
    r.add_argument("config")
    r.add_argument("--out", help="directory for the report (default: print to stdout)")
    r.add_argument("--format", choices=("json", "csv"), default=None)
    r.add_argument("--timings", action="store_true", help="include per-check runtimes (not bit-stable)")

    s = sub.add_parser("sweep", help="run an epsilon sweep and emit plot-ready CSV")
    s.add_argument("--suite", required=True, choices=("gluing", "f0"))
    s.add_argument("config")
    s.add_argument("--out", help="directory for the output (default: print to stdout)")
    s.add_argument("--format", choices=("json", "csv"), default="csv")

    t = sub.add_parser("topology", help="print the integer data for (rank, n)")
    t.add_argument("--rank", type=int, required=True)
    t.add_argument("--n", type=int, required=True)
    return p


def _emit(report, fmt, out, timings=False):
    if out:
        for f in export(report, fmt, out, timings):
            print(f, file=sys.stderr)
        return
    if fmt == "json":
        sys.stdout.write(to_json(report, timings))
    else:
        sys.stdout.write(checks_csv(report))


def _summary(report):
    for c in sorted(report.checks, key=lambda c: c.name):
        tag = "PASS" if c.passed else ("ERROR" if c.error else "FAIL")
        extra = f"  {c.error}" if c.error else ""
        print(f"{tag:5} {c.name}{extra}", file=sys.stderr)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "topology":
            rec = topology_record(args.rank, args.n)
            sys.stdout.write(json.dumps(_clean(rec), sort_keys=True, indent=2) + "\n")
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "validate":
            sys.stdout.write(json.dumps(_clean(cfg.as_dict()), sort_keys=True, indent=2) + "\n")
            return EXIT_OK
        if args.command == "run":
            report = run_suite(cfg, args.suite)
            _summary(report)
            _emit(report, args.format or cfg.out_format, args.out, args.timings)
            return report.exit_code()
        suite = {"gluing": "gluing_sweep", "f0": "f0_sweep"}[args.suite]
        report = run_suite(cfg, suite)
        _summary(report)
        if args.format == "csv" and not args.out:
            chk = report.checks[0]
            if chk.detail.get("epsilons"):
                sys.stdout.write(sweep_csv(chk))
        else:
            _emit(report, args.format, args.out)
        return report.exit_code()
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except GravikitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
