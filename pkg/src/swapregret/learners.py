"""Learner seats and the match driver for repeated two-player games.

Each seat sees the game with its own actions indexing rows, plays a mixed
strategy (or a pure action) every round, then observes the opponent's pure
action through the payoff column it selects. The internal-deviation learner
follows the sampled perturbed-leader update over swap pairs and plays an
approximate fixed point of the sampled mixture; the external baseline is
plain follow-the-perturbed-leader over actions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .deviations import (
    PAIR_DENSE_LIMIT,
    CumulativeDeviationGradient,
    evaluate_loss_from_gradient,
    loss_gradient,
    residual_l1,
)
from .errors import ConfigurationError, SolverFailure
from .fixed_point import extract_support, fixed_point
from .games import MatchHistory, MixedStrategy, RewardMatrix
from .perturbation import (
    OracleQuery,
    anytime_eta,
    default_eta,
    exact_softmax_probs,
    gumbel_sample,
    sampled_mixture,
    smooth_external_oracle,
)


@dataclass
class RoundLog:
    """Per-round internals of the swap-deviation learner."""

    t: int
    eta: float
    epsilon: float
    residual: float
    support_size: int
    mixture_sparsity: int
    realized: float          # reward of the played strategy this round
    loss_at_sampled: float   # round loss at the sampled mixture
    loss_at_exact: float | None  # round loss at the exact softmax mixture


def _resolve_eta(eta, n_actions: int, horizon: int | None, t: int) -> float:
    if eta == "anytime":
        return anytime_eta(n_actions, t)
    if eta == "auto":
        if horizon is None:
            return anytime_eta(n_actions, t)
        return default_eta(n_actions, horizon)
    return float(eta)


class InternalRegretLearner:
    """Swap-deviation learner: sampled perturbed-leader over pairs, then a fixed point.

    Every round draws ``samples`` perturbed argmaxes over the N^2 swap pairs,
    averages the winning vertices into a sparse mixture, and plays a strategy
    that the mixture leaves (almost) unchanged, to within the per-round budget
    1/sqrt(t). Oracle invocations are counted one per sample.
    """

    is_learner = True

    def __init__(
        self,
        matrix: RewardMatrix,
        samples: int,
        rng: np.random.Generator,
        eta="auto",
        horizon: int | None = None,
        track_decomposition: bool | None = None,
    ):
        if samples < 1:
            raise ConfigurationError("samples must be at least 1")
        if isinstance(eta, (int, float)) and eta <= 0:
            raise ConfigurationError("eta must be positive")
        self.matrix = matrix
        self.samples = int(samples)
        self.rng = rng
        self.eta = eta
        self.horizon = horizon
        n = matrix.n_actions
        if track_decomposition is None:
            track_decomposition = n <= PAIR_DENSE_LIMIT
        self.track_decomposition = track_decomposition
        self.gradient = CumulativeDeviationGradient(n)
        self.round = 1
        self.logs: list[RoundLog] = []
        self.oracle_calls = 0
        self.payoff_reads = 0
        self._pending = None

    def play(self) -> MixedStrategy:
        if self._pending is not None:
            raise ConfigurationError("play() called twice without observe()")
        t = self.round
        eta_t = _resolve_eta(self.eta, self.matrix.n_actions, self.horizon, t)
        query = OracleQuery(self.gradient, eta_t)
        exact_probs = exact_softmax_probs(query) if self.track_decomposition else None
        alpha = sampled_mixture(query, self.samples, self.rng)
        self.oracle_calls += self.samples
        epsilon_t = 1.0 / math.sqrt(t)
        try:
            x = fixed_point(alpha, epsilon_t)
        except SolverFailure as exc:
            exc.round_index = t
            raise
        self._pending = (alpha, x, eta_t, epsilon_t, exact_probs)
        return x

    def observe(self, payoffs: np.ndarray) -> None:
        if self._pending is None:
            raise ConfigurationError("observe() called before play()")
        alpha, x, eta_t, epsilon_t, exact_probs = self._pending
        self.payoff_reads += 1
        grad = loss_gradient(x, payoffs)
        loss_sampled = evaluate_loss_from_gradient(alpha, grad)
        loss_exact = None
        if exact_probs is not None:
            loss_exact = float(grad.base + (exact_probs * grad.pair_matrix()).sum())
        self.logs.append(
            RoundLog(
                t=self.round,
                eta=eta_t,
                epsilon=epsilon_t,
                residual=residual_l1(alpha, x),
                support_size=int(extract_support(alpha).size),
                mixture_sparsity=alpha.sparsity,
                realized=grad.base,
                loss_at_sampled=loss_sampled,
                loss_at_exact=loss_exact,
            )
        )
        self.gradient.add(grad)
        self._pending = None
        self.round += 1


class ExternalFTPLLearner:
    """Follow-the-perturbed-leader over pure actions (external-regret baseline)."""

    is_learner = True

    def __init__(
        self,
        matrix: RewardMatrix,
        rng: np.random.Generator,
        eta="auto",
        horizon: int | None = None,
        noise: str = "gumbel",
    ):
        if noise not in ("gumbel", "uniform"):
            raise ConfigurationError(f"unknown noise kind {noise!r}")
        self.matrix = matrix
        self.rng = rng
        self.eta = eta
        self.horizon = horizon
        self.noise = noise
        self.payoff_sums = np.zeros(matrix.n_actions)
        self.round = 1
        self.oracle_calls = 0
        self.payoff_reads = 0
        self._pending = None

    def play(self) -> MixedStrategy:
        if self._pending is not None:
            raise ConfigurationError("play() called twice without observe()")
        n = self.matrix.n_actions
        eta_t = _resolve_eta(self.eta, n, self.horizon, self.round)
        if self.noise == "gumbel":
            v = gumbel_sample(self.rng, n)
        else:
            v = self.rng.random(n)
        action = smooth_external_oracle(self.payoff_sums, eta_t, v)
        self.oracle_calls += 1
        self._pending = action
        return MixedStrategy.point_mass(action, n)

    def observe(self, payoffs: np.ndarray) -> None:
        if self._pending is None:
            raise ConfigurationError("observe() called before play()")
        self.payoff_sums += payoffs
        self.payoff_reads += 1
        self._pending = None
        self.round += 1


class FixedMixedPolicy:
    """Plays pure actions sampled from one fixed distribution."""

    is_learner = False
    needs_opponent_strategy = False

    def __init__(self, matrix: RewardMatrix, probs, rng: np.random.Generator):
        self.matrix = matrix
        self.strategy = MixedStrategy.from_dense(probs)
        if self.strategy.n_actions != matrix.n_actions:
            raise ConfigurationError("policy distribution does not match the game")
        self.rng = rng

    def act(self, t: int, opponent_strategy) -> int:
        return self.strategy.sample(self.rng)


def uniform_policy(matrix: RewardMatrix, rng: np.random.Generator) -> FixedMixedPolicy:
    n = matrix.n_actions
    return FixedMixedPolicy(matrix, np.full(n, 1.0 / n), rng)


class BestResponsePolicy:
    """Best-responds each round to the opponent's announced mixed strategy."""

    is_learner = False
    needs_opponent_strategy = True

    def __init__(self, matrix: RewardMatrix, rng: np.random.Generator = None):
        self.matrix = matrix
        self.rng = rng

    def act(self, t: int, opponent_strategy: MixedStrategy) -> int:
        if opponent_strategy is None:
            raise ConfigurationError(
                "best-response policy needs a learner on the other seat"
            )
        expected = self.matrix.to_dense() @ opponent_strategy.to_dense()
        return int(np.argmax(expected))


class ReplayPolicy:
    """Replays a prerecorded action sequence (an adversarial transcript)."""

    is_learner = False
    needs_opponent_strategy = False

    def __init__(self, matrix: RewardMatrix, actions, rng: np.random.Generator = None):
        self.matrix = matrix
        self.actions = [int(a) for a in actions]
        for a in self.actions:
            if not 0 <= a < matrix.n_actions:
                raise ConfigurationError(f"replay action {a} out of range")

    def act(self, t: int, opponent_strategy) -> int:
        if t >= len(self.actions):
            raise ConfigurationError("replay sequence shorter than the match")
        return self.actions[t]


@dataclass
class MatchResult:
    """Everything a finished match produced, per seat plus the joint record."""

    row_history: MatchHistory
    col_history: MatchHistory
    joint_actions: np.ndarray  # (T, 2) sampled pure action pairs
    row_logs: list | None
    col_logs: list | None
    row_oracle_calls: int
    col_oracle_calls: int


def run_match(row_seat, col_seat, rounds: int, action_rng: np.random.Generator) -> MatchResult:
    """Drive both seats for the given number of rounds.

    Learner seats announce mixed strategies which are then sampled into pure
    actions (one joint pair per round); policy seats emit pure actions
    directly, after seeing the other seat's announced mix. Each seat observes
    the opponent's pure action via its own payoff column. Fully reproducible
    given the seats' generators and ``action_rng``.
    """
    if rounds < 1:
        raise ConfigurationError("rounds must be at least 1")
    if row_seat.matrix.n_actions != col_seat.matrix.n_actions:
        raise ConfigurationError("seats disagree on the number of actions")
    row_hist = MatchHistory(row_seat.matrix.n_actions)
    col_hist = MatchHistory(col_seat.matrix.n_actions)
    joint = np.empty((rounds, 2), dtype=np.int64)
    for t in range(rounds):
        try:
            x_row = row_seat.play() if row_seat.is_learner else None
            x_col = col_seat.play() if col_seat.is_learner else None
        except SolverFailure as exc:
            if exc.round_index is None:
                exc.round_index = t + 1
            raise
        if row_seat.is_learner:
            a = x_row.sample(action_rng)
        else:
            a = row_seat.act(t, x_col)
        if col_seat.is_learner:
            b = x_col.sample(action_rng)
        else:
            b = col_seat.act(t, x_row)
        r_row = row_seat.matrix.column(b)
        r_col = col_seat.matrix.column(a)
        if row_seat.is_learner:
            row_seat.observe(r_row)
        if col_seat.is_learner:
            col_seat.observe(r_col)
        row_hist.append(x_row if x_row is not None else MixedStrategy.point_mass(a, row_hist.n_actions), b, r_row)
        col_hist.append(x_col if x_col is not None else MixedStrategy.point_mass(b, col_hist.n_actions), a, r_col)
        joint[t] = (a, b)
    return MatchResult(
        row_history=row_hist,
        col_history=col_hist,
        joint_actions=joint,
        row_logs=getattr(row_seat, "logs", None),
        col_logs=getattr(col_seat, "logs", None),
        row_oracle_calls=getattr(row_seat, "oracle_calls", 0),
        col_oracle_calls=getattr(col_seat, "oracle_calls", 0),
    )
