"""Command-line interface: run experiments, sweep grids, verify properties."""

from __future__ import annotations

import argparse
import json
import sys

from .config import parse_config, parse_grid
from .errors import ConfigurationError, SolverFailure

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_BAD_CONFIG = 2
EXIT_SOLVER = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapregret",
        description="Repeated-game regret minimization experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one configured match and write artifacts")
    run_p.add_argument("--config", required=True, help="config file (JSON or key=value)")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    sweep_p = sub.add_parser("sweep", help="run a hyperparameter grid")
    sweep_p.add_argument("--config", required=True, help="base config file")
    sweep_p.add_argument("--grid", required=True, help="grid file (JSON or key=value lists)")
    sweep_p.add_argument("--out", required=True, help="output directory")
    sweep_p.add_argument("--workers", type=int, default=None, help="process pool size")

    verify_p = sub.add_parser("verify", help="run a property suite")
    verify_p.add_argument("--suite", required=True, help="suite name, or 'all'")
    verify_p.add_argument("--json", action="store_true", help="emit JSON instead of lines")
    return parser


def _cmd_run(args) -> int:
    from .experiment import run_experiment

    try:
        config = parse_config(args.config)
        artifacts = run_experiment(config, args.out, figures=not args.no_figures)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    except SolverFailure as exc:
        where = f" at round {exc.round_index}" if exc.round_index is not None else ""
        print(f"solver failure{where}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(f"wrote artifacts to {artifacts.out_dir}")
    terminal = artifacts.manifest["terminal"]
    print(
        "row phi regret {:.4f}  ce epsilon {:.4f}".format(
            terminal["row"]["phi"], terminal["ce_epsilon"]
        )
    )
    return EXIT_OK


def _cmd_sweep(args) -> int:
    from .experiment import run_sweep

    try:
        config = parse_config(args.config)
        grid = parse_grid(args.grid)
        cells_path = run_sweep(config, grid, args.out, workers=args.workers)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    print(f"wrote sweep results to {cells_path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_suite

    try:
        results = run_suite(args.suite)
    except KeyError:
        from .verify import SUITES

        print(
            f"error: unknown suite {args.suite!r}; available: "
            f"{', '.join(sorted(SUITES))}, all",
            file=sys.stderr,
        )
        return EXIT_BAD_CONFIG
    if args.json:
        payload = [
            {
                "suite": r.suite,
                "name": r.name,
                "passed": r.passed,
                "measured": r.measured,
                "bound": r.bound,
                "note": r.note,
            }
            for r in results
        ]
        print(json.dumps(payload, indent=2))
    else:
        for result in results:
            print(result.line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    if args.command == "verify":
        return _cmd_verify(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
