"""Command-line harness for scenario-driven experiments."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiments import run_experiment
from .scenario import (ScenarioConfig, parse_scenario, render_record,
                       write_records)

_COMMANDS = ("simulate", "contract", "mix", "sweep-eps", "absorb", "tails",
             "certify", "picard-check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mkvlattice",
        description="Simulate and certify a mean-field stochastic delay "
                    "lattice system.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        cmd = sub.add_parser(name, help=f"run the {name} experiment")
        cmd.add_argument("--scenario", help="scenario file (sectioned "
                                            "key=value text)")
        cmd.add_argument("--out", help="output path stem for .record/.csv")
        cmd.add_argument("--seed", type=int, help="override the scenario seed")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads (results are identical for "
                              "any value)")
    return parser


def load_scenario(path: str | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    with open(path) as fh:
        return parse_scenario(fh.read())


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
        sc = replace(sc, kind=args.command)
        if args.seed is not None:
            sc = replace(sc, seed=args.seed)
        rec = run_experiment(sc)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = args.out or sc.path or None
    if out:
        write_records(rec, out)
        print(f"wrote {out}.record", file=sys.stderr)
    sys.stdout.write(render_record(rec))
    print(f"# wall_clock={rec.wall_clock:.3f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
