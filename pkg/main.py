import argparse
import sys
from typing import Any, Dict, List, Optional

from odap_sim import __version__
from odap_sim.cli import (
    Settings,
    cmd_analyze,
    cmd_calibrate,
    cmd_plot_data,
    cmd_simulate,
    cmd_sweep,
    configure_logging,
    parse_throughput,
)
from odap_sim.cli.commands import CALIBRATION_STAGES, DEFAULT_TARGETS
from odap_sim.errors import OdapSimError
from odap_sim.scenario import DEFAULT_SCENARIO


def _throughput(text: str) -> float:
    try:
        return parse_throughput(text)
    except OdapSimError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _seed(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be in [0, 2^64), got {seed}")
    return seed


def _csv_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def build_parser(settings: Settings) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--scenario",
        default=DEFAULT_SCENARIO,
        help="Scenario JSON path or bundled name (default: %(default)s)",
    )
    common.add_argument("--seed", type=_seed, default=0, help="Seed (base seed for sweeps)")
    common.add_argument("--out", help="Output path")
    common.add_argument("--force", action="store_true", help="Overwrite existing outputs")
    common.add_argument(
        "--jobs", type=int, default=settings.jobs, help="Parallel sweep workers"
    )
    common.add_argument(
        "--log-level", default=settings.log_level, help="Logging level (default: %(default)s)"
    )
    common.add_argument("--log-file", default="logs/odap_sim.log", help="Log file ('' disables)")

    parser = argparse.ArgumentParser(
        prog="odap-sim",
        description="Fragment distribution between databases and communicating products",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", parents=[common], help="Run one simulation")
    simulate.add_argument(
        "--pattern", default="ODA", help='ODA, ODAP, "F6 F8" or "!F1 !F2 F3 ..."'
    )
    simulate.add_argument("--throughput", type=_throughput, help="Product throughput, e.g. 1M")

    sweep = commands.add_parser("sweep", parents=[common], help="Run the pattern sweep")
    sweep.add_argument(
        "--throughputs",
        type=_csv_list,
        default=["100M", "54M", "11M", "1M"],
        help="Comma-separated throughputs (default: 100M,54M,11M,1M)",
    )
    sweep.add_argument("--replicates", type=int, default=10)
    sweep.add_argument(
        "--patterns",
        action="append",
        help="Restrict to a pattern (repeatable); default is all 2^k",
    )

    analyze = commands.add_parser("analyze", parents=[common], help="Factorial analysis")
    analyze.add_argument("sweep_csv")
    analyze.add_argument("--throughput", type=_throughput, help="Default: lowest swept")
    analyze.add_argument("--alpha", type=float, default=0.05)
    analyze.add_argument("--max-level", type=int, default=3)
    analyze.add_argument(
        "--unsafe", action="store_true", help="Ignore a scenario hash mismatch"
    )

    plot = commands.add_parser("plot-data", parents=[common], help="Pattern curve data")
    plot.add_argument("sweep_csv")
    plot.add_argument("--throughput", type=_throughput, help="Default: lowest swept")

    calibrate = commands.add_parser("calibrate", parents=[common], help="Calibrate a scenario")
    calibrate.add_argument(
        "--targets", default=DEFAULT_TARGETS, help="Targets JSON path or bundled name"
    )
    calibrate.add_argument(
        "--stages",
        type=_csv_list,
        default=list(CALIBRATION_STAGES),
        help="Comma-separated subset of rtt,oper_time,odap",
    )
    calibrate.add_argument("--tolerance", type=float, default=0.10)

    return parser


def dispatch(args: argparse.Namespace, settings: Settings) -> Dict[str, Any]:
    if args.command == "simulate":
        return cmd_simulate(
            scenario=args.scenario,
            pattern=args.pattern,
            throughput=args.throughput,
            seed=args.seed,
            trace_out=args.out,
            force=args.force,
            event_limit=settings.event_limit,
        )
    if args.command == "sweep":
        return cmd_sweep(
            out=args.out or "results/sweep.csv",
            scenario=args.scenario,
            throughputs=args.throughputs,
            replicates=args.replicates,
            base_seed=args.seed,
            patterns=args.patterns,
            jobs=args.jobs,
            force=args.force,
            pattern_cap=settings.pattern_cap,
            event_limit=settings.event_limit,
        )
    if args.command == "analyze":
        return cmd_analyze(
            args.sweep_csv,
            scenario=args.scenario,
            throughput=args.throughput,
            alpha=args.alpha,
            max_level=args.max_level,
            out=args.out,
            unsafe=args.unsafe,
            force=args.force,
        )
    if args.command == "plot-data":
        return cmd_plot_data(
            args.sweep_csv,
            out=args.out or "results/curve.csv",
            throughput=args.throughput,
            force=args.force,
        )
    return cmd_calibrate(
        out=args.out or "results/calibrated.json",
        scenario=args.scenario,
        targets=args.targets,
        stages=args.stages,
        tolerance=args.tolerance,
        force=args.force,
    )


def report(command: str, result: Dict[str, Any]) -> None:
    if command == "simulate":
        print(f"{result['makespan_s']:.6f}")
    elif command == "sweep":
        print(f"{result['rows']} records -> {result['out']}")
    elif command == "analyze":
        print(result["summary_text"])
        print()
        for term, coefficient in result["significant"]:
            print(f"{term:<16} {coefficient:>14.6f}")
    elif command == "plot-data":
        print(f"{result['points']} points -> {result['out']} (ODA line {result['oda_line']})")
    elif command == "calibrate":
        print(result["report"])
        for fit in result["makespan_fits"]:
            print(f"{fit['parameter']} = {fit['value']:.6g} ({fit['achieved']:.4g} vs {fit['target']:g})")
        print(f"-> {result['out']}")


def main(argv: Optional[List[str]] = None) -> int:
    settings = Settings.from_env()
    args = build_parser(settings).parse_args(argv)
    configure_logging(args.log_level, args.log_file or None)

    result = dispatch(args, settings)
    if not result["success"]:
        print(f"❌ Error: {result['error']}", file=sys.stderr)
        for row in result.get("residuals", []):
            print(f"   {row}", file=sys.stderr)
        return result["exit_code"]

    report(args.command, result)
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n👋 Interrupted", file=sys.stderr)
        sys.exit(130)
