"""
Main function
Date of Creation: 2026-10-17
Description: Command line of the simulator. Subcommands solve one scenario,
             run a Monte Carlo sweep, cross-check AWCS against brute-force
             enumeration and print annotated message traces.

Usage: python main.py {solve,sweep,validate,trace} [options]

Exit codes: 0 feasible (or all checks passed), 2 NoSolution or infeasible,
1 error.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Type

from pydantic import ValidationError

from cognitiveqos.algorithms.qos_protocol import QosProtocol, ResultRecord
from cognitiveqos.algorithms.simulation import Simulation
from cognitiveqos.classes.mailer import Mailer
from cognitiveqos.classes.scenario import Scenario
from cognitiveqos.errors import ConfigError, ScenarioError
from cognitiveqos.experiments.monte_carlo import (cycles_vs_messages,
                                                  emit_csv, run_monte_carlo)
from cognitiveqos.experiments.trends import assert_trends, trend_report
from cognitiveqos.helpers.config import (CliConfig, Mode, SweepConfig,
                                         configure_logging,
                                         default_output_dir,
                                         describe_validation_error,
                                         load_config, Model)
from cognitiveqos.helpers.oracle import TOY_INSTANCES, build_agents, validate
from cognitiveqos.helpers.scenario_io import generate_scenario, load_scenario
from cognitiveqos.visualization.sweep_plot import plot_sweep

logger = logging.getLogger("cognitiveqos")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path,
                        help="JSON configuration file; flags override it.")
    common.add_argument("--seed", type=int, help="Seed of the run.")
    common.add_argument("--delay-max", type=int,
                        help="Maximum message delay in ticks.")
    common.add_argument("--mode", choices=[mode.value for mode in Mode],
                        help="Access scheme.")
    common.add_argument("--out", type=Path, help="Output directory.")
    common.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for INFO, -vv for DEBUG logging.")

    parser = argparse.ArgumentParser(
        description="AWCS-based QoS provision for cognitive radio networks.")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", parents=[common],
                                help="Run the protocol on one scenario.")
    solve.add_argument("--scenario", type=Path, help="Scenario JSON file.")
    solve.add_argument("--n-cr", type=int, help="CRs of a generated scenario.")  # noqa
    solve.add_argument("--n-pu", type=int, help="PUs of a generated scenario.")  # noqa
    solve.add_argument("--trace", action="store_true",
                       help="Also write the delivery trace.")

    sweep = commands.add_parser("sweep", parents=[common],
                                help="Run a Monte Carlo sweep.")
    sweep.add_argument("--runs", type=int, help="Runs per grid point.")
    sweep.add_argument("--workers", type=int, help="Worker processes.")
    sweep.add_argument("--no-plots", action="store_true",
                       help="Skip the SVG plots.")
    sweep.add_argument("--no-progress", action="store_true",
                       help="Hide the progress bar.")

    check = commands.add_parser("validate", parents=[common],
                                help="Cross-check AWCS with enumeration.")
    check.add_argument("--n", type=int, default=200,
                       help="Single-variable instances.")
    check.add_argument("--n-multi", type=int, default=100,
                       help="Multi-variable instances.")

    trace = commands.add_parser("trace", parents=[common],
                                help="Print a cycle-by-cycle message log.")
    trace.add_argument("--scenario", type=Path, help="Scenario JSON file.")
    trace.add_argument("--n-cr", type=int, help="CRs of a generated scenario.")  # noqa
    trace.add_argument("--n-pu", type=int, help="PUs of a generated scenario.")  # noqa
    trace.add_argument("--instance", choices=sorted(TOY_INSTANCES),
                       help="Trace a toy colouring instance instead.")
    return parser


def revalidate(model: Type[Model], data: dict) -> Model:
    """
    Validates merged file and flag values, naming the failing field.
    """
    try:
        return model.model_validate(data)
    except ValidationError as error:
        raise ConfigError(
            f"arguments: {describe_validation_error(error)}") from error


def resolve_config(args: argparse.Namespace) -> CliConfig:
    """
    Loads the configuration file, then applies the flags given.
    """
    config = load_config(args.config)
    update = {}
    if args.seed is not None:
        update["seed"] = args.seed
    if args.mode is not None:
        update["mode"] = Mode(args.mode)
    if getattr(args, "n_cr", None) is not None:
        update["n_cr"] = args.n_cr
    if getattr(args, "n_pu", None) is not None:
        update["n_pu"] = args.n_pu
    if args.out is not None:
        update["output_dir"] = str(args.out)
    if args.delay_max is not None:
        update["simulation"] = {**config.simulation.model_dump(),
                                "delay_max": args.delay_max}
    return revalidate(CliConfig, {**config.model_dump(), **update})


def output_dir(config: CliConfig) -> Path:
    return Path(config.output_dir) if config.output_dir \
        else default_output_dir()


def scenario_for(args: argparse.Namespace, config: CliConfig) -> Scenario:
    if args.scenario is not None:
        scenario = load_scenario(args.scenario)
        return scenario.with_mode(config.mode) if args.mode else scenario
    return generate_scenario(config.seed, config.n_cr, config.n_pu,
                             config.radio, config.mode)


def cmd_solve(args: argparse.Namespace, config: CliConfig) -> int:
    scenario = scenario_for(args, config)
    run = QosProtocol(scenario, config.simulation,
                      config.radio.interference_range_ratio, config.seed,
                      trace=args.trace, verbose=args.verbose > 0).run()
    record = ResultRecord.from_run(run, config.simulation)

    directory = output_dir(config)
    path = directory / f"result_{scenario.mode.value}_seed{config.seed}.json"
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path.write_text(record.model_dump_json(indent=2) + "\n",
                        encoding="utf-8")
        if run.trace is not None:
            path.with_suffix(".trace").write_text(
                "\n".join(run.trace) + "\n", encoding="utf-8")
    except OSError as error:
        raise OSError(f"Cannot write results to {path}: "
                      f"{error.strerror or error}") from error

    print(f"seed {config.seed} mode {scenario.mode.value}: {run.phase.value}")
    if run.failure:
        print(f"reason: {run.failure}")
    if run.silenced:
        print(f"silenced CRs: {run.silenced}")
    for cr in sorted(run.powers):
        rate = f" rate {run.rates[cr]} bit/s" if cr in run.rates else ""
        print(f"CR{cr}: power {float(run.powers[cr]):.3f} mW "
              f"(cap {float(run.pu_caps[cr]):.3f} mW){rate}")
    print(f"cycles {run.metrics.cycles}, messages "
          f"{run.metrics.total_messages}, NCCC {run.metrics.nccc}")
    print(f"result written to {path}")
    return EXIT_OK if run.feasible else EXIT_INFEASIBLE


def cmd_sweep(args: argparse.Namespace, config: CliConfig) -> int:
    update = {"mode": config.mode}
    if args.seed is not None:
        update["base_seed"] = config.seed
    if args.runs is not None:
        update["runs_per_point"] = args.runs
    if args.workers is not None:
        update["workers"] = args.workers
    if args.delay_max is not None:
        update["delays"] = [args.delay_max]
    sweep = revalidate(SweepConfig, {**config.sweep.model_dump(), **update})

    result = run_monte_carlo(sweep, progress=not args.no_progress)
    directory = output_dir(config)
    path = directory / f"sweep_{sweep.mode.value}_seed{sweep.base_seed}.csv"
    emit_csv(result, path)
    if not args.no_plots:
        plot_sweep(result, directory)

    print(f"{len(result.rows)} runs written to {path}")
    print(trend_report(assert_trends(result)))
    print(cycles_vs_messages(result).to_string(index=False))
    if result.anomalies:
        print(f"{len(result.anomalies)} anomalous runs, see the log")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, config: CliConfig) -> int:
    if args.n == 0 and args.n_multi == 0:
        logger.warning("No instances requested, nothing validated.")
    cases = validate(args.n, args.n_multi, config.seed,
                     config.simulation.delay_max)
    print(f"{'kind':<8} {'passed':>6} {'total':>6}")
    for kind in ("single", "multi"):
        mine = [case for case in cases if case.kind == kind]
        print(f"{kind:<8} {sum(c.passed for c in mine):>6} {len(mine):>6}")
    failures = [case for case in cases if not case.passed]
    for case in failures:
        print(f"FAIL {case.detail} (seed {case.seed})")
    return EXIT_OK if not failures else EXIT_ERROR


def cmd_trace(args: argparse.Namespace, config: CliConfig) -> int:
    if args.instance is not None:
        instance = TOY_INSTANCES[args.instance]()
        mailer = Mailer(config.simulation.delay_policy(), config.seed,
                        config.simulation.read_policy, trace=True)
        Simulation(mailer, build_agents(instance),
                   verbose=args.verbose > 0).run(
                       config.simulation.max_cycles)
        lines = mailer.trace
    else:
        run = QosProtocol(scenario_for(args, config), config.simulation,
                          config.radio.interference_range_ratio,
                          config.seed, trace=True,
                          verbose=args.verbose > 0).run()
        lines = run.trace
    print("\n".join(lines))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
    "trace": cmd_trace,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parses the arguments and runs the subcommand.

    Parameters:
    - argv (Optional[List[str]]): Arguments, sys.argv[1:] if omitted.

    Returns:
    - int: The exit code.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exit_request:
        return EXIT_OK if exit_request.code == 0 else EXIT_ERROR
    configure_logging(args.verbose)
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](args, config)
    except (OSError, ConfigError, ScenarioError, ValueError) as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
