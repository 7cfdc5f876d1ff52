"""Command-line entry point: ``crisissim run | validate | oracle``.

Exit codes: 0 ok, 1 usage, 2 validation, 3 runtime.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time

from .config import ConfigError, load_params
from .engine import DEFAULT_HORIZON, DEFAULT_PATHS, deterministic_path, run_batches
from .model_state import validate_params
from .report import DEFAULT_QUANTILES, ReportError, emit_all, stats_from_batch
from .scenario import load_scenario, load_scenario_set

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2, 3
ORACLE_COLUMNS = ("Y", "Y_pot", "gap", "pi", "b", "pd", "r_eff", "rp", "i_pol", "R", "B",
                  "S_off", "E", "Gini", "Health", "Unrest", "Cred", "W", "regime")

log = logging.getLogger("crisissim")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _quantile_list(text: str):
    try:
        qs = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not qs or any(not 0.0 <= q <= 1.0 for q in qs):
        raise argparse.ArgumentTypeError("quantiles must be in [0, 1]")
    return qs


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="crisissim", description="Monte Carlo policy-scenario simulator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate scenarios and write CSV tables")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", metavar="FILE")
    src.add_argument("--scenario-set", metavar="FILE")
    run.add_argument("--params", metavar="FILE", help="parameter file (default: reference calibration)")
    run.add_argument("--paths", type=_positive, default=DEFAULT_PATHS)
    run.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument("--out", metavar="DIR", required=True)
    run.add_argument("--quantiles", type=_quantile_list, default=DEFAULT_QUANTILES, metavar="LIST")
    run.add_argument("--workers", type=_positive, default=1)

    val = sub.add_parser("validate", help="check parameter and scenario files")
    val.add_argument("--params", metavar="FILE")
    val.add_argument("--scenario", metavar="FILE", action="append", default=[])
    val.add_argument("--scenario-set", metavar="FILE", action="append", default=[])
    val.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON)

    orc = sub.add_parser("oracle", help="print the zero-shock deterministic trajectory")
    orc.add_argument("--scenario", metavar="FILE")
    orc.add_argument("--params", metavar="FILE")
    orc.add_argument("--horizon", type=_positive, default=DEFAULT_HORIZON)
    return p


def _load_scenarios(args):
    if getattr(args, "scenario_set", None):
        return load_scenario_set(args.scenario_set, args.horizon)
    return [load_scenario(args.scenario, args.horizon)]


def _check_effective(scenarios, params):
    for sc in scenarios:
        problems = validate_params(sc.effective_params(params))
        if problems:
            raise ConfigError(f"scenario {sc.name}: " + "; ".join(problems))


def cmd_run(args) -> int:
    params = load_params(args.params)
    scenarios = _load_scenarios(args)
    _check_effective(scenarios, params)
    t0 = time.perf_counter()
    batches = run_batches(scenarios, params, args.seed, args.paths, args.horizon, workers=args.workers)
    stats = [stats_from_batch(batches[sc.name], args.quantiles) for sc in scenarios]
    files = emit_all(stats, args.out)
    for s in stats:
        if s.n_aborted:
            log.warning("%s: %d of %d paths aborted", s.scenario, s.n_aborted, s.n_paths)
    print(f"{len(scenarios)} scenario(s) x {args.paths} paths x {args.horizon} quarters "
          f"in {time.perf_counter() - t0:.1f}s; wrote {len(files)} files to {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if not (args.params or args.scenario or args.scenario_set):
        raise UsageError("validate: give at least one of --params, --scenario, --scenario-set")
    params = load_params(args.params)
    scenarios = []
    for path in args.scenario:
        scenarios.append(load_scenario(path, args.horizon))
    for path in args.scenario_set:
        scenarios.extend(load_scenario_set(path, args.horizon))
    _check_effective(scenarios, params)
    print(f"ok: params{'' if args.params is None else ' ' + args.params}, {len(scenarios)} scenario(s)")
    return EXIT_OK


def cmd_oracle(args) -> int:
    params = load_params(args.params)
    if args.scenario:
        scenario = load_scenario(args.scenario, args.horizon)
    else:
        from .scenario import Scenario

        scenario = Scenario("baseline")
    res = deterministic_path(scenario, params, args.horizon)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("quarter",) + ORACLE_COLUMNS)
    for t in range(args.horizon + 1):
        w.writerow([t] + [repr(float(res.trajectory[c][t])) for c in ORACLE_COLUMNS])
    if res.aborted:
        print(f"aborted: {res.aborted}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


COMMANDS = {"run": cmd_run, "validate": cmd_validate, "oracle": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, FileNotFoundError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ReportError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
