"""
convlab - Command Line Entry Point

Runs scenario and probe configs and the built-in reproductions, writing
JSON reports to stdout or --output and traces to --trace-csv.

Exit codes: 0 every expectation matched, 1 some mismatch, 2 configuration error.
"""
import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence, Union

from convlab.config import config
from convlab.engine.errors import LabError, ScenarioConfigError
from convlab.models.report import Report
from convlab.services.builtin_service import builtin_service
from convlab.services.runner_service import runner_service
from convlab.services.scenario_service import scenario_service

logger = logging.getLogger("convlab")

EXIT_MATCHED = 0
EXIT_MISMATCH = 1
EXIT_CONFIG_ERROR = 2


# =============================================================================
# Arguments
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="convlab",
        description="Convergence laboratory for closed convex sets in sequence spaces.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v logs INFO, -vv logs DEBUG")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_outputs(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
        p.add_argument("--output", help="write the report JSON here instead of stdout")
        p.add_argument("--trace-csv", help="write the trace rows (n, object_id, value) here")
        p.add_argument("--timing", action="store_true", help="record wall time in the report")
        return p

    run = with_outputs(sub.add_parser("run", help="run a scenario config"))
    run.add_argument("config_file", help="scenario file, or a name under DB_PATH/scenarios")

    probe = with_outputs(sub.add_parser("probe", help="run a probe config"))
    probe.add_argument("config_file", help="probe file, or a name under DB_PATH/scenarios")

    repro = with_outputs(sub.add_parser("repro", help="run a built-in reproduction"))
    repro.add_argument("name", help="built-in name, or 'all'")

    sub.add_parser("list-builtins", help="list the built-in reproductions")
    sub.add_parser("list-scenarios", help="list the configs under DB_PATH/scenarios")
    return parser


def configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, config.LOG_LEVEL.upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


# =============================================================================
# Commands
# =============================================================================

def _emit(reports: Union[Report, List[Report]], args: argparse.Namespace) -> int:
    if args.output:
        scenario_service.save_report(reports, args.output)
    elif isinstance(reports, list):
        sys.stdout.write(scenario_service.reports_json(reports))
    else:
        sys.stdout.write(scenario_service.report_json(reports))
    if args.trace_csv:
        scenario_service.write_trace_csv(reports, args.trace_csv)
    batch = reports if isinstance(reports, list) else [reports]
    for report in batch:
        if not report.matched:
            logger.warning("%s: some verdict did not match its expectation", report.scenario)
    return EXIT_MATCHED if all(r.matched for r in batch) else EXIT_MISMATCH


def cmd_run(args: argparse.Namespace) -> int:
    if scenario_service.is_probe(args.config_file):
        return cmd_probe(args)
    scenario = scenario_service.load_scenario(args.config_file)
    return _emit(runner_service.run_scenario(scenario, timing=args.timing), args)


def cmd_probe(args: argparse.Namespace) -> int:
    probe = scenario_service.load_probe(args.config_file)
    return _emit(runner_service.run_probe(probe, timing=args.timing), args)


def cmd_repro(args: argparse.Namespace) -> int:
    if args.name == "all":
        return _emit(builtin_service.run_all(timing=args.timing), args)
    return _emit(builtin_service.builtin_repro(args.name, timing=args.timing), args)


def cmd_list_builtins(args: argparse.Namespace) -> int:
    for name, description in builtin_service.list_builtins():
        sys.stdout.write(f"{name}\t{description}\n")
    return EXIT_MATCHED


def cmd_list_scenarios(args: argparse.Namespace) -> int:
    for name in scenario_service.list_scenarios():
        sys.stdout.write(f"{name}\n")
    return EXIT_MATCHED


COMMANDS = {
    "run": cmd_run,
    "probe": cmd_probe,
    "repro": cmd_repro,
    "list-builtins": cmd_list_builtins,
    "list-scenarios": cmd_list_scenarios,
}


def _fail(message: str, paths: Sequence[str] = ()) -> int:
    payload = {"success": False, "error": message, "paths": list(paths)}
    sys.stderr.write(json.dumps(payload, ensure_ascii=False) + "\n")
    return EXIT_CONFIG_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except ScenarioConfigError as exc:
        logger.error("configuration error: %s", exc)
        return _fail(str(exc), exc.paths)
    except (LabError, FileNotFoundError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return _fail(str(exc))
    except KeyError as exc:
        # unknown built-in name
        return _fail(exc.args[0] if exc.args else str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
