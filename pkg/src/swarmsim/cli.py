"""Command-line front end: validate, run, selfcheck, check-gradients.

Exit codes are a total function of what happened: 0 success (valid file,
converged run, passing checks), 1 validation or check failure, 2 unreadable
or malformed input, 3 run stopped by a safety violation, 4 run completed
the horizon without meeting the convergence thresholds.

The SWARMSIM_LOG_LEVEL environment variable (DEBUG, INFO, WARNING, ERROR)
controls log verbosity; default WARNING.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ScenarioFormatError
from .model import Scenario, validate_scenario
from .reporting import monitor_extrema, write_run_artifacts
from .scenario_io import apply_overrides, load_scenario, scenario_digest
from .selfcheck import DEFAULT_SEED, check_gradients, run_all
from .sim import Simulator

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FORMAT = 2
EXIT_VIOLATION = 3
EXIT_NOT_CONVERGED = 4

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunReport:
    """What a run produced, as printed and as written to the summary."""

    digest: str
    verdict: str
    extrema: dict
    files: dict


def _load(path: str) -> Scenario:
    return load_scenario(path)


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        sc = _load(args.scenario)
    except ScenarioFormatError as e:
        print(f"format error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    report = validate_scenario(sc)
    for line in report.lines():
        print(line)
    if report.ok:
        print(f"ok: {len(sc.agents)} agents, {len(sc.obstacles)} obstacles, "
              f"{len(sc.formation.edges)} formation edges")
        return EXIT_OK
    return EXIT_INVALID


def _overridden(sc: Scenario, args: argparse.Namespace) -> Scenario:
    return apply_overrides(sc, dt=args.dt, t_end=args.t_end, kappa=args.kappa,
                           gain=args.gain, integrator=args.integrator)


def cmd_run(args: argparse.Namespace) -> int:
    try:
        sc = _overridden(_load(args.scenario), args)
    except ScenarioFormatError as e:
        print(f"format error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    report = validate_scenario(sc)
    if not report.ok:
        for line in report.lines():
            print(line)
        return EXIT_INVALID

    traj = Simulator(sc).run()
    outdir = Path(args.out)
    files = write_run_artifacts(traj, sc, outdir)
    rep = RunReport(digest=scenario_digest(sc), verdict=str(traj.verdict),
                    extrema=monitor_extrema(traj), files=files)
    print(f"scenario {rep.digest}")
    print(f"verdict: {rep.verdict}")
    ex = rep.extrema
    if ex:
        print(f"gamma: {ex['gamma_initial_max']:.6g} -> {ex['gamma_final_max']:.6g} (max over agents)")
        print(f"min beta: {min(ex['min_beta'].values()):.6g}")
        print(f"min distances: agents {ex['min_dist_agents']:.4g}, "
              f"obstacles {ex['min_dist_obstacles']:.4g}")
        print(f"max reach {ex['max_reach']:.4g}, max |pitch| {ex['max_pitch']:.4g}")
    print(f"artifacts in {outdir}")
    if traj.verdict.status == "converged":
        return EXIT_OK
    if traj.verdict.status == "safety-violation":
        return EXIT_VIOLATION
    return EXIT_NOT_CONVERGED


def cmd_selfcheck(args: argparse.Namespace) -> int:
    results = run_all(seed=args.seed)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVALID


def cmd_check_gradients(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    result = check_gradients(rng)
    print(result.line())
    return EXIT_OK if result.passed else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmsim",
        description="Potential-field formation control simulator for "
                    "second-order rigid-body agents.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check a scenario file")
    p_val.add_argument("scenario", help="scenario YAML file")
    p_val.set_defaults(func=cmd_validate)

    p_run = sub.add_parser("run", help="simulate a scenario and emit artifacts")
    p_run.add_argument("scenario", help="scenario YAML file")
    p_run.add_argument("--out", default="swarmsim-out", help="output directory")
    p_run.add_argument("--dt", type=float, default=None, help="integration step")
    p_run.add_argument("--t-end", type=float, default=None, help="horizon in seconds")
    p_run.add_argument("--kappa", type=float, default=None,
                       help="potential composition exponent")
    p_run.add_argument("--gain", type=float, default=None,
                       help="damping gain applied to every agent")
    p_run.add_argument("--integrator", default=None,
                       choices=["rk4", "semi-implicit-euler"])
    p_run.add_argument("--seed", type=int, default=None,
                       help="accepted for reproducibility bookkeeping; the "
                            "integrator itself is deterministic")
    p_run.set_defaults(func=cmd_run)

    p_self = sub.add_parser("selfcheck", help="run the embedded property suites")
    p_self.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_self.set_defaults(func=cmd_selfcheck)

    p_grad = sub.add_parser("check-gradients",
                            help="finite-difference audit of potential gradients")
    p_grad.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p_grad.set_defaults(func=cmd_check_gradients)
    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("SWARMSIM_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
