"""Command line interface.

Exit codes: 0 success, 1 invariant or competitiveness violation, 2 input error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .checks import replay_with_checks
from .engine import EngineError, run_sequence
from .network import NetworkError
from .offline import SizeLimitError
from .report import FORMATS, TEXT, compare, format_mapping, format_trace, summarize, trace_records
from .scenario import (
    ScenarioError,
    dump_scenario,
    generate_random,
    generate_scheduling,
    load_scenario,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_run(args) -> int:
    sc = load_scenario(args.scenario)
    cfg = sc.engine_config()
    state, history = run_sequence(sc.network, cfg, sc.requests)
    trace = format_trace(trace_records(state, history), args.format)
    summary = format_mapping(summarize(sc, cfg, state), args.format)
    _write(trace, args.trace)
    _write(summary, args.summary)
    return EXIT_OK


def cmd_compare(args) -> int:
    sc = load_scenario(args.scenario)
    try:
        result = compare(sc)
    except SizeLimitError as exc:
        print(f"comparison skipped: {exc}", file=sys.stderr)
        return EXIT_OK
    _write(format_mapping(result, args.format), None)
    return EXIT_OK if result["within_alpha"] and result["within_beta"] else EXIT_VIOLATION


def cmd_check(args) -> int:
    sc = load_scenario(args.scenario)
    report = replay_with_checks(sc.network, sc.engine_config(), sc.requests, primal=not args.no_primal)
    lines = [f"{name} checks={count}" for name, count in sorted(report.counts.items())]
    lines += [f"VIOLATION {v}" for v in report.violations]
    lines.append("ok" if report.ok else f"FAILED ({len(report.violations)} violations)")
    print("\n".join(lines))
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_gen(args) -> int:
    sc = generate_random(
        args.seed,
        args.nodes,
        args.edges,
        args.requests,
        (args.demand_min, args.demand_max),
        (args.benefit_min, args.benefit_max),
        (args.capacity_min, args.capacity_max),
        mixed_mode=args.mixed,
    )
    _write(dump_scenario(sc), args.output)
    return EXIT_OK


def cmd_gen_sched(args) -> int:
    sc = generate_scheduling(
        args.seed,
        args.machines,
        args.jobs,
        speedup_range=(args.speedup_min, 1.0),
    )
    _write(dump_scenario(sc), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onmcf", description="Online all-or-nothing multi-commodity flow"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name: str, help: str):
        p = sub.add_parser(name, help=help)
        p.add_argument("--scenario", required=True, metavar="PATH")
        p.add_argument("--format", choices=FORMATS, default=TEXT)
        return p

    p = scenario_cmd("run", "process a scenario and emit the trace and a summary")
    p.add_argument("--trace", metavar="PATH", help="trace destination (default stdout)")
    p.add_argument("--summary", metavar="PATH", help="summary destination (default stdout)")
    p.set_defaults(func=cmd_run)

    p = scenario_cmd("compare", "compare against the brute-force offline optimum")
    p.set_defaults(func=cmd_compare)

    p = scenario_cmd("check", "replay with every invariant asserted")
    p.add_argument("--no-primal", action="store_true", help="skip the primal feasibility separation")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="write a random scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nodes", type=int, default=5)
    p.add_argument("--edges", type=int, default=8)
    p.add_argument("--requests", type=int, default=8)
    p.add_argument("--demand-min", type=float, default=1.0)
    p.add_argument("--demand-max", type=float, default=3.0)
    p.add_argument("--benefit-min", type=float, default=1.0)
    p.add_argument("--benefit-max", type=float, default=10.0)
    p.add_argument("--capacity-min", type=float, default=1.0)
    p.add_argument("--capacity-max", type=float, default=3.0)
    p.add_argument("--mixed", action="store_true", help="enable mixed-demand oracle dispatch")
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("gen-sched", help="write a random machine-scheduling scenario")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--machines", type=int, default=3)
    p.add_argument("--jobs", type=int, default=6)
    p.add_argument("--speedup-min", type=float, default=0.5)
    p.add_argument("-o", "--output", metavar="PATH")
    p.set_defaults(func=cmd_gen_sched)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, NetworkError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EngineError as exc:
        print(f"engine error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
