"""Experiment orchestration: seat assembly, runs, artifacts, and sweeps.

A run produces delimited curve files plus a JSON manifest that echoes the
configuration so the run can be reproduced byte for byte, and (optionally)
rendered figures next to the delimited output. Sweeps fan out over a grid of
hyperparameters in a process pool and aggregate terminal metrics.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
import subprocess
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, SeatSpec, load_game
from .errors import ConfigurationError, SolverFailure
from .games import MATRIX_DENSE_LIMIT, RewardMatrix
from .learners import (
    BestResponsePolicy,
    ExternalFTPLLearner,
    FixedMixedPolicy,
    InternalRegretLearner,
    ReplayPolicy,
    run_match,
    uniform_policy,
)
from .metrics import JointEmpirical, build_report, ce_epsilon, ce_epsilon_curve

SCHEMA_VERSION = 1

REGRET_COLUMNS = ("t", "external", "internal", "phi", "ftpl_term", "sampling_term", "fixedpoint_term")
CE_COLUMNS = ("t", "epsilon", "row_gain_raw", "col_gain_raw")

WORKERS_ENV = "SWAPREGRET_WORKERS"


def build_seat(
    spec: SeatSpec,
    matrix: RewardMatrix,
    rng: np.random.Generator,
    rounds: int,
    samples: int,
    eta,
):
    """Instantiate one seat with its own-oriented matrix and rng stream."""
    kind = spec.kind
    if kind == "internal":
        return InternalRegretLearner(
            matrix, samples=samples, rng=rng, eta=eta, horizon=rounds
        )
    if kind == "external":
        return ExternalFTPLLearner(
            matrix, rng=rng, eta=eta, horizon=rounds, noise=spec.params.get("noise", "gumbel")
        )
    if kind == "uniform":
        return uniform_policy(matrix, rng)
    if kind == "fixed":
        probs = spec.params.get("probs")
        if probs is None:
            raise ConfigurationError("fixed seat needs probabilities, e.g. fixed:0.3,0.7")
        return FixedMixedPolicy(matrix, probs, rng)
    if kind == "best-response":
        return BestResponsePolicy(matrix, rng)
    if kind == "replay":
        actions = spec.params.get("actions")
        if actions is None:
            path = spec.params.get("path")
            if path is None:
                raise ConfigurationError("replay seat needs an action file")
            actions = [int(line) for line in Path(path).read_text().split()]
        return ReplayPolicy(matrix, actions, rng)
    raise ConfigurationError(f"unknown seat kind {kind!r}")


def play_match(config: ExperimentConfig):
    """Run the configured match; returns (result, game info, matrices)."""
    config.validate()
    a, b, info = load_game(config)
    if a.n_actions > MATRIX_DENSE_LIMIT:
        raise ConfigurationError(
            f"matches need dense-representable games (N <= {MATRIX_DENSE_LIMIT})"
        )
    a_dense = RewardMatrix.from_dense(a.to_dense())
    b_dense = RewardMatrix.from_dense(b.to_dense())
    col_own = b_dense.transposed()
    ss = np.random.SeedSequence(config.seed)
    row_ss, col_ss, action_ss = ss.spawn(3)
    row_seat = build_seat(
        config.row, a_dense, np.random.default_rng(row_ss), config.rounds, config.samples, config.eta
    )
    col_seat = build_seat(
        config.col, col_own, np.random.default_rng(col_ss), config.rounds, config.samples, config.eta
    )
    result = run_match(row_seat, col_seat, config.rounds, np.random.default_rng(action_ss))
    return result, info, a_dense, b_dense


@dataclass
class RunArtifacts:
    out_dir: Path
    manifest: dict
    regret_paths: dict
    ce_path: Path
    figure_paths: list


def _format(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _write_csv(path: Path, header, rows) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    os.replace(tmp, path)


def _regret_rows(report):
    rounds = report.phi_curve.size
    decomp = report.decomposition
    for t in range(rounds):
        row = [
            str(t + 1),
            _format(report.external_curve[t]),
            _format(report.internal_curve[t]),
            _format(report.phi_curve[t]),
        ]
        if decomp is not None:
            row += [
                _format(decomp["ftpl_curve"][t]),
                _format(decomp["sampling_curve"][t]),
                _format(decomp["fixedpoint_curve"][t]),
            ]
        else:
            row += ["", "", ""]
        yield row


def _git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=Path(__file__).resolve().parent,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def run_experiment(config: ExperimentConfig, out_dir, figures: bool = True) -> RunArtifacts:
    """Execute one configured match and write all artifacts into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    result, game_info, a, b = play_match(config)

    reports = {}
    regret_paths = {}
    for seat_name, history, logs in (
        ("row", result.row_history, result.row_logs),
        ("col", result.col_history, result.col_logs),
    ):
        report = build_report(history, logs)
        reports[seat_name] = report
        path = out_dir / f"regret_{seat_name}.csv"
        _write_csv(path, REGRET_COLUMNS, _regret_rows(report))
        regret_paths[seat_name] = path

    eps_curve, row_raw, col_raw = ce_epsilon_curve(result.joint_actions, a, b)
    ce_path = out_dir / "ce.csv"
    _write_csv(
        ce_path,
        CE_COLUMNS,
        (
            [str(t + 1), _format(eps_curve[t]), _format(row_raw[t]), _format(col_raw[t])]
            for t in range(eps_curve.size)
        ),
    )

    figure_paths = []
    if figures:
        from . import plots

        for seat_name, report in reports.items():
            fig_path = out_dir / f"regret_{seat_name}.png"
            plots.save_regret_figure(report, fig_path, title=f"{seat_name} seat")
            figure_paths.append(fig_path)
        ce_fig = out_dir / "ce.png"
        plots.save_ce_figure(eps_curve, ce_fig)
        figure_paths.append(ce_fig)

    wall = time.perf_counter() - started
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "package": f"swapregret {__version__}",
        "git": _git_describe(),
        "config": config.echo(),
        "game_info": game_info,
        "n_actions": a.n_actions,
        "columns": {"regret": list(REGRET_COLUMNS), "ce": list(CE_COLUMNS)},
        "oracle_calls": {"row": result.row_oracle_calls, "col": result.col_oracle_calls},
        "terminal": {
            "row": _terminal_summary(reports["row"]),
            "col": _terminal_summary(reports["col"]),
            "ce_epsilon": float(eps_curve[-1]),
        },
        "wall_time_s": wall,
        "files": {
            "regret": {name: path.name for name, path in regret_paths.items()},
            "ce": ce_path.name,
            "figures": [path.name for path in figure_paths],
        },
    }
    manifest_path = out_dir / "manifest.json"
    tmp = manifest_path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, manifest_path)
    return RunArtifacts(
        out_dir=out_dir,
        manifest=manifest,
        regret_paths=regret_paths,
        ce_path=ce_path,
        figure_paths=figure_paths,
    )


def _terminal_summary(report) -> dict:
    summary = {
        "external": report.external,
        "internal": report.internal,
        "phi": report.phi,
        "external_alt_orientation": report.external_alt_orientation,
    }
    if report.decomposition is not None:
        summary["ftpl_term"] = report.decomposition["ftpl"]
        summary["sampling_term"] = report.decomposition["sampling"]
        summary["fixedpoint_term"] = report.decomposition["fixedpoint"]
    return summary


# --------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = (
    "eta", "S", "T", "seed", "status",
    "row_phi", "row_external", "row_internal", "row_sampling_term",
    "col_phi", "ce_epsilon", "error",
)


def _sweep_cell(args) -> dict:
    config, overrides = args
    cell = replace(
        config,
        eta=overrides.get("eta", config.eta),
        samples=overrides.get("S", config.samples),
        rounds=overrides.get("T", config.rounds),
        seed=overrides.get("seed", config.seed),
    )
    row = {
        "eta": cell.eta,
        "S": cell.samples,
        "T": cell.rounds,
        "seed": cell.seed,
        "status": "ok",
        "error": "",
    }
    try:
        result, _, a, b = play_match(cell)
        row_report = build_report(result.row_history, result.row_logs)
        col_report = build_report(result.col_history, result.col_logs)
        joint = JointEmpirical.from_pairs(result.joint_actions, a.n_actions, b.n_actions)
        decomp = row_report.decomposition
        row.update(
            row_phi=row_report.phi,
            row_external=row_report.external,
            row_internal=row_report.internal,
            row_sampling_term=decomp["sampling"] if decomp else "",
            col_phi=col_report.phi,
            ce_epsilon=ce_epsilon(joint, a, b).epsilon,
        )
    except (ConfigurationError, SolverFailure) as exc:
        row.update(status="failed", error=str(exc))
        row.update(
            row_phi="", row_external="", row_internal="",
            row_sampling_term="", col_phi="", ce_epsilon="",
        )
    return row


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(f"{WORKERS_ENV} must be an integer, got {env!r}")
    return min(4, os.cpu_count() or 1)


def run_sweep(config: ExperimentConfig, grid: dict, out_dir, workers: int | None = None) -> Path:
    """Run every grid cell, write per-cell rows and a per-setting summary."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    keys = sorted(grid)
    cells = [
        dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))
    ]
    # Grid key "seeds" feeds the per-cell "seed" override.
    for cell in cells:
        if "seeds" in cell:
            cell["seed"] = cell.pop("seeds")
    workers = workers or default_workers()
    tasks = [(config, cell) for cell in cells]
    if workers == 1 or len(cells) == 1:
        rows = [_sweep_cell(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, tasks))

    cells_path = out_dir / "sweep.csv"
    _write_csv(
        cells_path,
        SWEEP_COLUMNS,
        (
            [_cell_str(row[column]) for column in SWEEP_COLUMNS]
            for row in rows
        ),
    )
    _write_summary(out_dir / "sweep_summary.csv", rows)
    return cells_path


def _cell_str(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_summary(path: Path, rows) -> None:
    """Aggregate over seeds: mean and standard error per (eta, S, T) setting."""
    groups: dict = {}
    for row in rows:
        if row["status"] != "ok":
            continue
        key = (row["eta"], row["S"], row["T"])
        groups.setdefault(key, []).append(row)
    header = (
        "eta", "S", "T", "n_seeds",
        "row_phi_mean", "row_phi_stderr",
        "row_external_mean", "row_external_stderr",
        "ce_epsilon_mean", "ce_epsilon_stderr",
    )
    out_rows = []
    for key in sorted(groups, key=str):
        members = groups[key]
        out_row = [_cell_str(key[0]), str(key[1]), str(key[2]), str(len(members))]
        for metric in ("row_phi", "row_external", "ce_epsilon"):
            values = np.array([float(m[metric]) for m in members])
            mean = float(values.mean())
            stderr = float(values.std(ddof=1) / np.sqrt(values.size)) if values.size > 1 else 0.0
            out_row += [repr(mean), repr(stderr)]
        out_rows.append(out_row)
    _write_csv(path, header, out_rows)
