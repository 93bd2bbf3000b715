"""Command-line entry point.

    sim run <scenario|config-path> [--out DIR] [--t-end X] [--grid N]
    sim validate <config-path>
    sim mms [--out DIR]
    sim list

Exit codes: 0 when every required certificate passes, 1 on certificate
failure, 2 on abort or configuration error.  The output root defaults to
$SIM_OUT_ROOT (else ./out) when --out is not given.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import scenarios
from .scenarios import ConfigError, MMS_SCENARIO


def _print_report(report) -> None:
    print(f"scenario: {report.name}")
    if report.abort:
        print(f"  ABORTED: {report.abort}")
    print(f"  steps: {report.steps}, runtime: {report.runtime_seconds:.1f} s")
    for name, verdict in report.certificates.items():
        if verdict != "not-applicable":
            print(f"  {name}: {verdict}")
    for key, value in report.headline.items():
        print(f"  {key}: {value}")
    print(f"  result: {'PASS' if report.passed else 'FAIL'}")
    for path in report.artifacts:
        print(f"  wrote {path}")


def _exit_code(report) -> int:
    if report.abort:
        return 2
    return 0 if report.passed else 1


def cmd_run(args) -> int:
    try:
        report = scenarios.run_scenario(args.target, out_dir=args.out,
                                        t_end=args.t_end, grid_n=args.grid)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    _print_report(report)
    return _exit_code(report)


def cmd_validate(args) -> int:
    try:
        cfg = scenarios.parse_config_file(args.config)
        state = scenarios.build_initial_state(cfg)
    except (ConfigError, OSError) as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return 2
    report = scenarios.assumption_report(cfg)
    print(json.dumps(cfg.echo, indent=2))
    print(f"initial state ok at t = {state.t}: "
          f"{cfg.grid.ncells} cells, dim {cfg.grid.dim}")
    print(f"motility assumptions: positivity={report.gamma_positive} "
          f"decreasing={report.gamma_strictly_decreasing} "
          f"decay={report.gamma_decays} "
          f"uniform_bound={report.uniform_bound_holds} "
          f"(k={report.uniform_bound_k}, inf={report.uniform_bound_inf})")
    print(f"intake assumptions: F(0)=0 {report.intake_zero_at_zero}, "
          f"positive={report.intake_positive}, "
          f"lipschitz={report.intake_lipschitz:.6g}")
    return 0


def cmd_mms(args) -> int:
    report = scenarios.run_scenario(MMS_SCENARIO, out_dir=args.out)
    print("spatial orders:", ", ".join(f"{o:.3f}" for o in report.headline["spatial_orders"]))
    print("temporal orders:", ", ".join(f"{o:.3f}" for o in report.headline["temporal_orders"]))
    print(f"result: {'PASS' if report.passed else 'FAIL'}")
    for path in report.artifacts:
        print(f"wrote {path}")
    return _exit_code(report)


def cmd_list(_args) -> int:
    for name in scenarios.scenario_names():
        print(name)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Density-suppressed motility simulator and certification harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario or config file")
    p_run.add_argument("target", help="scenario name or config path")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--t-end", type=float, default=None,
                       help="override the configured end time")
    p_run.add_argument("--grid", type=int, default=None,
                       help="override cells per axis")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(func=cmd_validate)

    p_mms = sub.add_parser("mms", help="manufactured-solution order check")
    p_mms.add_argument("--out", default=None)
    p_mms.set_defaults(func=cmd_mms)

    p_list = sub.add_parser("list", help="list built-in scenarios")
    p_list.set_defaults(func=cmd_list)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
