"""``bogc-tilt`` entry point."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .. import __version__
from .config import SUITES, ConfigError, config_parse
from .report import bundle, canonical_json, report_write
from .suites import run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bogc-tilt", description="Run identity checks and write JSON reports.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the suites selected by a config file")
    run.add_argument("--config", required=True, help="JSON config file")
    run.add_argument("--out", help="report path (default: config 'output', else stdout)")
    run.add_argument("--suite", action="append", choices=SUITES,
                     help="run only this suite; may be repeated")
    sub.add_parser("list-suites", help="print the available suites")
    sub.add_parser("version", help="print the version")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-suites":
        print("\n".join(SUITES))
        return EXIT_PASS
    if args.command == "version":
        print(__version__)
        return EXIT_PASS
    try:
        cfg = config_parse(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.suite:
        cfg = replace(cfg, suites=tuple(s for s in SUITES if s in args.suite))
    reports = run_suite(cfg)
    for r in reports:
        failed = sum(not rec.passed for rec in r.records)
        status = "PASS" if r.passed else "FAIL"
        extra = f" error={r.error}" if r.error else ""
        print(f"{status} {r.suite}: {len(r.records)} records, {failed} failed{extra}", file=sys.stderr)
    out = args.out or cfg.output
    if out:
        report_write(reports, out, cfg.to_json())
    else:
        sys.stdout.write(canonical_json(bundle(reports, cfg.to_json())))
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
