"""Experiment configuration: file parsing and game construction.

Config files are either JSON objects or flat ``key = value`` lines; both map
onto the same keys. Dense game files are plain text: the first line holds N,
then N rows of N decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .games import NAMED_GAMES, RewardMatrix, named_game

_CONFIG_KEYS = {"game", "col_game", "row", "col", "T", "S", "eta", "seed", "noise"}
_GRID_KEYS = {"eta", "S", "T", "seeds"}
_SEAT_KINDS = {"internal", "external", "uniform", "best-response", "fixed", "replay"}


@dataclass
class SeatSpec:
    kind: str
    params: dict = field(default_factory=dict)


@dataclass
class ExperimentConfig:
    game: str | dict
    row: SeatSpec
    col: SeatSpec
    rounds: int
    samples: int
    eta: float | str
    seed: int
    col_game: str | dict = "zero-sum"

    def validate(self) -> None:
        if self.rounds < 1:
            raise ConfigurationError("T must be at least 1")
        if self.samples < 1:
            raise ConfigurationError("S must be at least 1")
        if isinstance(self.eta, str):
            if self.eta not in ("auto", "anytime"):
                raise ConfigurationError(f"eta must be a number, 'auto' or 'anytime', got {self.eta!r}")
        elif self.eta <= 0:
            raise ConfigurationError("eta must be positive")

    def echo(self) -> dict:
        return {
            "game": self.game,
            "col_game": self.col_game,
            "row": {"kind": self.row.kind, **self.row.params},
            "col": {"kind": self.col.kind, **self.col.params},
            "T": self.rounds,
            "S": self.samples,
            "eta": self.eta,
            "seed": self.seed,
        }


def _coerce_kv_text(path: Path) -> dict:
    data = {}
    for lineno, raw_line in enumerate(path.read_text().splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        data[key] = value
    return data


def _read_mapping(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    text = path.read_text().lstrip()
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: top-level JSON value must be an object")
        return data
    return _coerce_kv_text(path)


def parse_seat(value) -> SeatSpec:
    if isinstance(value, dict):
        kind = value.get("kind")
        params = {k: v for k, v in value.items() if k != "kind"}
    else:
        parts = str(value).split(":", 1)
        kind = parts[0]
        params = {}
        if len(parts) == 2:
            if kind == "fixed":
                params["probs"] = [float(p) for p in parts[1].split(",")]
            elif kind == "replay":
                params["path"] = parts[1]
            elif kind == "external":
                params["noise"] = parts[1]
            else:
                raise ConfigurationError(f"seat kind {kind!r} takes no argument")
    if kind not in _SEAT_KINDS:
        raise ConfigurationError(f"unknown seat kind {kind!r}; expected one of {sorted(_SEAT_KINDS)}")
    return SeatSpec(kind=kind, params=params)


def _parse_eta(value):
    if isinstance(value, (int, float)):
        return float(value)
    if value in ("auto", "anytime"):
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"eta must be a number, 'auto' or 'anytime', got {value!r}")


def parse_config(path) -> ExperimentConfig:
    data = _read_mapping(path)
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
    missing = {"game", "row", "col", "T", "seed"} - set(data)
    if missing:
        raise ConfigurationError(f"missing config keys: {sorted(missing)}")
    try:
        config = ExperimentConfig(
            game=data["game"],
            col_game=data.get("col_game", "zero-sum"),
            row=parse_seat(data["row"]),
            col=parse_seat(data["col"]),
            rounds=int(data["T"]),
            samples=int(data.get("S", 100)),
            eta=_parse_eta(data.get("eta", "auto")),
            seed=int(data["seed"]),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"invalid config value: {exc}") from exc
    config.validate()
    return config


def parse_grid(path) -> dict:
    data = _read_mapping(path)
    unknown = set(data) - _GRID_KEYS
    if unknown:
        raise ConfigurationError(f"unknown grid keys: {sorted(unknown)}")
    grid = {}
    for key, value in data.items():
        if isinstance(value, str):
            value = [part.strip() for part in value.split(",") if part.strip()]
        if not isinstance(value, list) or not value:
            raise ConfigurationError(f"grid key {key!r} must map to a non-empty list")
        if key == "eta":
            grid[key] = [_parse_eta(v) for v in value]
        else:
            grid[key] = [int(v) for v in value]
    if not grid:
        raise ConfigurationError("grid is empty")
    return grid


def read_dense_game_file(path) -> RewardMatrix:
    """Dense game file: first line N, then N rows of N decimals."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"game file not found: {path}")
    lines = [line for line in path.read_text().splitlines() if line.strip()]
    try:
        n = int(lines[0])
    except (IndexError, ValueError):
        raise ConfigurationError(f"{path}: first line must hold the action count")
    if len(lines) != n + 1:
        raise ConfigurationError(f"{path}: expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        values = [float(v) for v in line.split()]
        if len(values) != n:
            raise ConfigurationError(f"{path}:{lineno}: expected {n} entries")
        rows.append(values)
    return RewardMatrix.from_dense(np.array(rows))


def write_dense_game_file(path, matrix: RewardMatrix) -> None:
    dense = matrix.to_dense()
    lines = [str(dense.shape[0])]
    for row in dense:
        lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_game_token(value) -> dict:
    if isinstance(value, dict):
        return value
    token = str(value)
    if token in NAMED_GAMES:
        return {"type": "named", "name": token}
    if token.startswith("dense:"):
        return {"type": "dense", "path": token.split(":", 1)[1]}
    if token.startswith("generated:"):
        parts = token.split(":")
        if len(parts) != 4:
            raise ConfigurationError("generated game syntax: generated:<generator>:<seed>:<N>")
        return {"type": "generated", "generator": parts[1], "seed": int(parts[2]), "n": int(parts[3])}
    raise ConfigurationError(
        f"unknown game {token!r}; use a named game {NAMED_GAMES}, dense:<path> "
        f"or generated:<generator>:<seed>:<N>"
    )


def _build_single_matrix(spec: dict) -> RewardMatrix:
    kind = spec.get("type")
    if kind == "dense":
        return read_dense_game_file(spec["path"])
    if kind == "generated":
        return RewardMatrix.generated(spec.get("generator", "uniform"), int(spec["seed"]), int(spec["n"]))
    raise ConfigurationError(f"cannot build a matrix from spec {spec!r}")


def load_game(config: ExperimentConfig) -> tuple[RewardMatrix, RewardMatrix, dict]:
    """Build (row matrix A, column matrix B, info) from the config.

    B is oriented as B(i, j) = column player's reward under (row i, col j).
    When no column game is given, the column player faces the zero-sum
    complement B = 1 - A, which stays inside [0, 1].
    """
    game_spec = _parse_game_token(config.game)
    if game_spec.get("type") == "named":
        a, b, info = named_game(game_spec["name"])
        return a, b, info
    a = _build_single_matrix(game_spec)
    info = {"row_game": game_spec}
    col_token = config.col_game
    if col_token == "zero-sum":
        b = RewardMatrix.from_dense(1.0 - a.to_dense())
        info["col_game"] = "zero-sum"
    else:
        b = _build_single_matrix(_parse_game_token(col_token))
        info["col_game"] = _parse_game_token(col_token)
    if b.n_actions != a.n_actions:
        raise ConfigurationError(
            f"row and column games disagree on N: {a.n_actions} vs {b.n_actions}"
        )
    return a, b, info
