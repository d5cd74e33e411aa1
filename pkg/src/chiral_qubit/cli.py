"""Command-line entry point: ``chiral-qubit simulate|describe|list``.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys

from chiral_qubit.errors import AccuracyError, ConfigError, DomainError, WindowOverflowError
from chiral_qubit.runner import run_scenario
from chiral_qubit.scenario import describe, list_scenarios, load_config

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chiral-qubit", description="Chiral qubit scenario runner.")
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario file")
    sim.add_argument("config", help="path to a scenario TOML file")
    sim.add_argument("--jobs", type=int, default=1, help="worker processes for independent grid points")
    sim.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    sim.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    desc = sub.add_parser("describe", help="print the schema of a scenario kind")
    desc.add_argument("kind")

    sub.add_parser("list", help="list scenario kinds")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for kind in list_scenarios():
            print(kind)
        return EXIT_OK

    if args.command == "describe":
        try:
            print(describe(args.kind))
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    try:
        scenario = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}: configuration error\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        manifest, summary = run_scenario(scenario, out_dir=args.out, jobs=args.jobs, seed=args.seed)
    except (DomainError, WindowOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AccuracyError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    for key, value in summary.items():
        if isinstance(value, str):
            continue
        print(f"{key} = {value}")
    if not manifest.converged:
        print("warning: numerical result flagged as unconverged", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
