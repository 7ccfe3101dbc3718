"""Two-player matrix game primitives.

Payoff matrices live behind a per-entry evaluator so that games far too large
to store densely can still be queried; mixed strategies are kept as a small
explicit support plus a uniform tail, which is the shape the fixed-point
routine produces and keeps coordinate queries cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

Action = int

# Total-mass slack tolerated on any distribution.
MASS_TOL = 1e-9

# Largest N for which an N x N matrix may be materialized densely.
MATRIX_DENSE_LIMIT = 4096


# --------------------------------------------------------------------------
# deterministic entry generator for "generated" matrices (splitmix64 hash)

_MIX_C1 = np.uint64(0x9E3779B97F4A7C15)
_MIX_C2 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_C3 = np.uint64(0x94D049BB133111EB)
_TWO64 = float(2**64)


def _splitmix64(values: np.ndarray) -> np.ndarray:
    z = values.astype(np.uint64, copy=True)
    with np.errstate(over="ignore"):
        z += _MIX_C1
        z = (z ^ (z >> np.uint64(30))) * _MIX_C2
        z = (z ^ (z >> np.uint64(27))) * _MIX_C3
        return z ^ (z >> np.uint64(31))


def _hashed_uniform(seed: int, flat_indices: np.ndarray) -> np.ndarray:
    """Deterministic pseudo-random values in [0, 1) for the given cells."""
    key = _splitmix64(np.array([seed], dtype=np.uint64))[0]
    with np.errstate(over="ignore"):
        mixed = _splitmix64(flat_indices.astype(np.uint64) + key)
    return mixed.astype(np.float64) / _TWO64


GENERATORS = ("uniform",)


class RewardMatrix:
    """Square payoff matrix with entries in [0, 1], accessed entrywise.

    Two backends: ``dense`` wraps an ndarray, ``generated`` computes entries
    on demand from a seed so that N can exceed dense-storage limits. Both are
    deterministic: querying the same cell twice returns the same value.
    """

    __slots__ = ("n_actions", "backend", "_dense", "_seed", "_generator")

    def __init__(self, n_actions: int, backend: str, dense=None, seed=None, generator=None):
        if n_actions < 1:
            raise ConfigurationError(f"n_actions must be positive, got {n_actions}")
        self.n_actions = int(n_actions)
        self.backend = backend
        self._dense = dense
        self._seed = seed
        self._generator = generator

    @classmethod
    def from_dense(cls, values) -> "RewardMatrix":
        arr = np.array(values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ConfigurationError(f"reward matrix must be square, got shape {arr.shape}")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ConfigurationError("reward matrix entries must lie in [0, 1]")
        arr.flags.writeable = False
        return cls(arr.shape[0], "dense", dense=arr)

    @classmethod
    def generated(cls, generator: str, seed: int, n_actions: int) -> "RewardMatrix":
        if generator not in GENERATORS:
            raise ConfigurationError(
                f"unknown generator {generator!r}; available: {', '.join(GENERATORS)}"
            )
        return cls(n_actions, "generated", seed=int(seed), generator=generator)

    def entry(self, i: int, j: int) -> float:
        """Reward A(i, j) for row action i against column action j."""
        self._check_index(i)
        self._check_index(j)
        if self.backend == "dense":
            return float(self._dense[i, j])
        flat = np.array([i * self.n_actions + j], dtype=np.uint64)
        return float(_hashed_uniform(self._seed, flat)[0])

    def column(self, j: int) -> np.ndarray:
        """The payoff vector (A(0, j), ..., A(N-1, j)) for opponent action j."""
        self._check_index(j)
        n = self.n_actions
        if self.backend == "dense":
            return self._dense[:, j].copy()
        flats = np.arange(n, dtype=np.uint64) * np.uint64(n) + np.uint64(j)
        return _hashed_uniform(self._seed, flats)

    def row(self, i: int) -> np.ndarray:
        self._check_index(i)
        n = self.n_actions
        if self.backend == "dense":
            return self._dense[i, :].copy()
        base = np.uint64(i * n)
        flats = base + np.arange(n, dtype=np.uint64)
        return _hashed_uniform(self._seed, flats)

    def to_dense(self) -> np.ndarray:
        if self.backend == "dense":
            return self._dense.copy()
        if self.n_actions > MATRIX_DENSE_LIMIT:
            raise ConfigurationError(
                f"refusing to densify generated matrix with N={self.n_actions} "
                f"(limit {MATRIX_DENSE_LIMIT})"
            )
        flats = np.arange(self.n_actions * self.n_actions, dtype=np.uint64)
        return _hashed_uniform(self._seed, flats).reshape(self.n_actions, self.n_actions)

    def transposed(self) -> "RewardMatrix":
        """The same game seen from the other seat (actions index rows)."""
        return RewardMatrix.from_dense(self.to_dense().T)

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n_actions:
            raise ConfigurationError(f"action index {i} out of range for N={self.n_actions}")

    def __repr__(self):
        return f"RewardMatrix(n_actions={self.n_actions}, backend={self.backend!r})"


class MixedStrategy:
    """Distribution over N actions stored as explicit support plus uniform tail.

    Every off-support action carries ``tail_value``, so a coordinate query
    costs O(|support|) regardless of N. Dense distributions are represented
    as full-support instances with a zero tail.
    """

    __slots__ = ("n_actions", "support", "tail_value", "_indices", "_values", "_cum")

    def __init__(self, n_actions: int, support: dict, tail_value: float):
        if n_actions < 1:
            raise ConfigurationError(f"n_actions must be positive, got {n_actions}")
        items = sorted(support.items())
        indices = np.array([i for i, _ in items], dtype=np.int64)
        values = np.array([v for _, v in items], dtype=np.float64)
        if indices.size and (indices[0] < 0 or indices[-1] >= n_actions):
            raise ConfigurationError("support index out of range")
        if indices.size != len(set(support)):
            raise ConfigurationError("duplicate support indices")
        if np.any(values < -MASS_TOL) or tail_value < -MASS_TOL:
            raise ConfigurationError("negative probability in strategy")
        tail_value = max(float(tail_value), 0.0)
        values = np.maximum(values, 0.0)
        total = float(values.sum() + (n_actions - indices.size) * tail_value)
        if abs(total - 1.0) > MASS_TOL:
            raise ConfigurationError(f"strategy mass {total} is not 1 within {MASS_TOL}")
        self.n_actions = int(n_actions)
        self.support = dict(zip(indices.tolist(), values.tolist()))
        self.tail_value = tail_value
        self._indices = indices
        self._values = values
        self._cum = np.concatenate(([0.0], np.cumsum(values)))

    @classmethod
    def from_dense(cls, probs) -> "MixedStrategy":
        arr = np.asarray(probs, dtype=np.float64)
        return cls(arr.size, {i: float(p) for i, p in enumerate(arr)}, 0.0)

    @classmethod
    def point_mass(cls, action: Action, n_actions: int) -> "MixedStrategy":
        return cls(n_actions, {int(action): 1.0}, 0.0)

    @classmethod
    def uniform(cls, n_actions: int) -> "MixedStrategy":
        return cls(n_actions, {}, 1.0 / n_actions)

    @property
    def support_size(self) -> int:
        return self._indices.size

    @property
    def support_mass(self) -> float:
        return float(self._cum[-1])

    def coordinate(self, i: Action) -> float:
        """Probability of action i: the support value, or the shared tail."""
        if not 0 <= i < self.n_actions:
            raise ConfigurationError(f"action index {i} out of range for N={self.n_actions}")
        return self.support.get(i, self.tail_value)

    def to_dense(self) -> np.ndarray:
        dense = np.full(self.n_actions, self.tail_value)
        dense[self._indices] = self._values
        return dense

    def sample(self, rng: np.random.Generator, size: int | None = None):
        """Draw actions by inverse CDF over (support block, uniform tail block).

        Deterministic given the rng state; vectorized when ``size`` is given.
        """
        scalar = size is None
        u = rng.random(1 if scalar else size)
        out = np.empty(u.size, dtype=np.int64)
        sup_total = self.support_mass
        in_support = u < sup_total
        if self._indices.size:
            pos = np.searchsorted(self._cum, u[in_support], side="right") - 1
            pos = np.clip(pos, 0, self._indices.size - 1)
            out[in_support] = self._indices[pos]
        n_tail = self.n_actions - self._indices.size
        rest = ~in_support
        if np.any(rest):
            if n_tail == 0 or self.tail_value <= 0.0:
                # Round-off pushed u past the support mass; clamp to the top.
                pos = np.searchsorted(self._cum, np.minimum(u[rest], sup_total), side="right") - 1
                out[rest] = self._indices[np.clip(pos, 0, self._indices.size - 1)]
            else:
                rank = ((u[rest] - sup_total) / self.tail_value).astype(np.int64)
                rank = np.clip(rank, 0, n_tail - 1)
                out[rest] = _offset_ranks(rank, self._indices)
        return int(out[0]) if scalar else out

    def __repr__(self):
        return (
            f"MixedStrategy(n_actions={self.n_actions}, "
            f"support={self.support}, tail_value={self.tail_value})"
        )


def _offset_ranks(ranks: np.ndarray, sorted_support: np.ndarray) -> np.ndarray:
    """Map ranks within the off-support actions to absolute action indices."""
    idx = ranks.copy()
    # Each pass accounts for support indices lying at or below the candidate;
    # stabilizes in at most |support| + 1 passes.
    for _ in range(sorted_support.size + 1):
        shifted = ranks + np.searchsorted(sorted_support, idx, side="right")
        if np.array_equal(shifted, idx):
            break
        idx = shifted
    return idx


@dataclass
class RoundRecord:
    """One round as seen by a single seat: played mix, observed action, payoffs."""

    strategy: MixedStrategy
    opponent_action: Action
    payoffs: np.ndarray  # payoffs[i] = reward of pure action i this round


@dataclass
class MatchHistory:
    """Per-seat record of every round, input to all regret metrics."""

    n_actions: int
    rounds: list = field(default_factory=list)

    def append(self, strategy: MixedStrategy, opponent_action: Action, payoffs: np.ndarray):
        if strategy.n_actions != self.n_actions or payoffs.shape != (self.n_actions,):
            raise ConfigurationError("history record dimensions do not match the game")
        self.rounds.append(RoundRecord(strategy, int(opponent_action), payoffs))

    def __len__(self):
        return len(self.rounds)

    def __iter__(self):
        return iter(self.rounds)

    def strategies_dense(self) -> np.ndarray:
        return np.array([r.strategy.to_dense() for r in self.rounds])

    def payoff_rows(self) -> np.ndarray:
        return np.array([r.payoffs for r in self.rounds])

    def opponent_actions(self) -> np.ndarray:
        return np.array([r.opponent_action for r in self.rounds], dtype=np.int64)


def payoff(x: MixedStrategy, j: Action, matrix: RewardMatrix) -> float:
    """Expected reward of mixed play x against pure opponent action j."""
    if x.n_actions != matrix.n_actions:
        raise ConfigurationError(
            f"strategy over {x.n_actions} actions does not match N={matrix.n_actions}"
        )
    return float(x.to_dense() @ matrix.column(j))


def payoff_vector(j: Action, matrix: RewardMatrix) -> np.ndarray:
    """Per-action rewards against opponent action j, i.e. column j of the matrix."""
    return matrix.column(j)


def strategy_coordinate(x: MixedStrategy, i: Action) -> float:
    return x.coordinate(i)


def sample_action(x: MixedStrategy, rng: np.random.Generator) -> Action:
    return x.sample(rng)


# --------------------------------------------------------------------------
# named games, affinely rescaled into [0, 1] where needed

def _scaled(raw: np.ndarray) -> tuple[np.ndarray, float, float]:
    lo = float(raw.min())
    hi = float(raw.max())
    scale = hi - lo if hi > lo else 1.0
    return (raw - lo) / scale, lo, scale


def named_game(name: str) -> tuple[RewardMatrix, RewardMatrix, dict]:
    """Return (row matrix, column matrix, scaling info) for a named game.

    Column payoffs are oriented as B(i, j) = column player's reward when the
    row player uses i and the column player uses j.
    """
    if name == "matching-pennies":
        a_raw = np.array([[1.0, -1.0], [-1.0, 1.0]])
        b_raw = -a_raw
    elif name == "coordination":
        a_raw = np.eye(2)
        b_raw = np.eye(2)
    elif name == "chicken":
        a_raw = np.array([[2.0, 1.0], [3.0, 0.0]])
        b_raw = a_raw.T
    elif name == "shapley":
        a_raw = np.eye(3)
        b_raw = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    else:
        raise ConfigurationError(f"unknown named game {name!r}")
    a_scaled, a_off, a_scale = _scaled(a_raw)
    b_scaled, b_off, b_scale = _scaled(b_raw)
    info = {
        "name": name,
        "row_scaling": {"offset": a_off, "scale": a_scale},
        "col_scaling": {"offset": b_off, "scale": b_scale},
    }
    return RewardMatrix.from_dense(a_scaled), RewardMatrix.from_dense(b_scaled), info


NAMED_GAMES = ("matching-pennies", "coordination", "chicken", "shapley")
