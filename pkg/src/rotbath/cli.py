"""Command-line entry point.

    rotbath run <scenario> [--out DIR] [--seed N] [--threads N] [--plot]
    rotbath check <scenario>
    rotbath kms <scenario>

Exit codes: 0 success; 2 scenario/usage errors; 3 a run that ended in a
runaway status (partial output was written and flagged); 1 anything else.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .bathmodels import default_kms_grid, kms_check
from .core import shifted_kms_residual
from .runner import build_bath, expand_modes, run_scenario
from .scenario import ScenarioError, parse_scenario


def _load(path: str):
    text = Path(path).read_text()
    return parse_scenario(text)


def _cmd_run(args) -> int:
    scenario = _load(args.scenario)
    result = run_scenario(
        scenario,
        out_dir=args.out,
        seed=args.seed,
        threads=args.threads,
        plots=True if args.plot else None,
        base_dir=Path(args.scenario).parent,
    )
    for path in result.files:
        print(path)
    if not result.ok:
        print(f"status: {result.status} ({result.message})", file=sys.stderr)
        return 3
    return 0


def _cmd_check(args) -> int:
    _load(args.scenario)
    print("OK")
    return 0


def _cmd_kms(args) -> int:
    scenario = _load(args.scenario)
    bath = build_bath(scenario.bath, Path(args.scenario).parent)
    grid = default_kms_grid()
    if math.isinf(bath.beta):
        print("beta = inf: KMS fixes the emission side to zero; residual check "
              "applies at finite temperature only")
        return 0
    static = kms_check(bath.spectrum, bath.beta, grid)
    print(f"static KMS residual (100-point grid): {static:.3e}")
    worst = 0.0
    ms = sorted({abs(m.m) for m in expand_modes(scenario.modes)} - {0}) if scenario.modes else []
    for m in ms or [1, 2, 3]:
        residual = shifted_kms_residual(bath, m, grid)
        worst = max(worst, residual)
        print(f"rotating-frame KMS residual (m = {m}): {residual:.3e}")
    threshold = 1e-9
    if max(static, worst) > threshold:
        print(f"residual exceeds {threshold:g}", file=sys.stderr)
        return 3
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rotbath",
        description="Simulate field modes coupled to a rotating heat bath "
                    "(natural units, hbar = k_B = 1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario and write its output files")
    p_run.add_argument("scenario")
    p_run.add_argument("--out", default=None, help="output directory (default: scenario [output] dir)")
    p_run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads for per-mode evaluation")
    p_run.add_argument("--plot", action="store_true", help="also render figures next to the CSV output")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="validate a scenario file and exit")
    p_check.add_argument("scenario")
    p_check.set_defaults(func=_cmd_check)

    p_kms = sub.add_parser("kms", help="report the bath's KMS residuals")
    p_kms.add_argument("scenario")
    p_kms.set_defaults(func=_cmd_kms)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as err:
        print(f"scenario error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # pragma: no cover - defensive
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
