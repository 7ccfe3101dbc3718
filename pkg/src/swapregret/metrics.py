"""Regret and correlated-equilibrium metrics over recorded match histories.

All metrics are brute-force over the stored history (strategies and payoff
vectors per round), independent of the streaming quantities the learner
accumulates, so the two paths can be checked against each other. Regret is
oriented as comparator gain minus algorithm payoff, the direction in which
"no regret" means the value grows sublinearly; the opposite orientation is
reported alongside rather than silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .games import MatchHistory, RewardMatrix


def external_regret(history: MatchHistory) -> tuple[float, np.ndarray]:
    """Best fixed action's cumulative payoff minus the algorithm's, with curve."""
    if len(history) == 0:
        raise ConfigurationError("history is empty")
    payoffs = history.payoff_rows()
    strategies = history.strategies_dense()
    algo = np.cumsum((strategies * payoffs).sum(axis=1))
    fixed = np.cumsum(payoffs, axis=0)
    curve = fixed.max(axis=1) - algo
    return float(curve[-1]), curve


def best_fixed_action(history: MatchHistory) -> int:
    payoffs = history.payoff_rows()
    return int(np.argmax(payoffs.sum(axis=0)))


def internal_regret_curve(history: MatchHistory) -> np.ndarray:
    """Running best swap gain: max over all pairs of sum_t x_t(i) (r_t(k) - r_t(i)).

    The pair set includes (i, i), whose gain is identically zero, so the
    value never drops below zero.
    """
    if len(history) == 0:
        raise ConfigurationError("history is empty")
    n = history.n_actions
    totals = np.zeros((n, n))
    curve = np.empty(len(history))
    for t, record in enumerate(history):
        x = record.strategy.to_dense()
        r = record.payoffs
        totals += np.outer(x, r) - np.outer(x * r, np.ones(n))
        curve[t] = totals.max()
    return curve


def internal_regret(history: MatchHistory) -> float:
    """Best hindsight gain from rerouting one action onto another (>= 0)."""
    return float(internal_regret_curve(history)[-1])


def phi_regret(history: MatchHistory) -> float:
    """Best gain over all convex swap mixtures.

    A linear objective over the mixture simplex peaks at a vertex, so this is
    the internal regret clamped below at zero (the clamp is a no-op here but
    states the intent).
    """
    return max(0.0, internal_regret(history))


@dataclass
class JointEmpirical:
    """Empirical joint play: counts over (row action, column action) pairs."""

    counts: np.ndarray
    total: int

    @classmethod
    def from_pairs(cls, pairs: np.ndarray, n_row: int, n_col: int) -> "JointEmpirical":
        pairs = np.asarray(pairs, dtype=np.int64)
        counts = np.zeros((n_row, n_col), dtype=np.int64)
        np.add.at(counts, (pairs[:, 0], pairs[:, 1]), 1)
        return cls(counts=counts, total=int(pairs.shape[0]))


@dataclass
class CorrelatedEqGap:
    """Best per-player swap gain under the empirical joint distribution."""

    epsilon: float
    row_gain: float
    col_gain: float


def ce_epsilon(joint: JointEmpirical, a: RewardMatrix, b: RewardMatrix) -> CorrelatedEqGap:
    """Approximate-correlated-equilibrium gap of the joint empirical play.

    For each player, the best average gain from replaying every occurrence of
    one of their actions as another; nonnegative by clamping, raw values kept.
    """
    if joint.total <= 0:
        raise ConfigurationError("joint empirical play is empty")
    counts = joint.counts.astype(np.float64)
    a_dense = a.to_dense()
    b_dense = b.to_dense()
    row_mix = counts @ a_dense.T  # (i, k) -> sum_j counts[i, j] * A[k, j]
    col_mix = counts.T @ b_dense  # (j, l) -> sum_i counts[i, j] * B[i, l]
    row_gain = _best_offdiagonal_gain(row_mix) / joint.total
    col_gain = _best_offdiagonal_gain(col_mix) / joint.total
    return CorrelatedEqGap(
        epsilon=max(0.0, row_gain, col_gain),
        row_gain=row_gain,
        col_gain=col_gain,
    )


def _best_offdiagonal_gain(mix: np.ndarray) -> float:
    """Largest actual-deviation gain in a (played, replacement) tableau."""
    n = mix.shape[0]
    if n < 2:
        return 0.0
    gains = mix - np.diag(mix)[:, None]
    return float(gains[~np.eye(n, dtype=bool)].max())


def ce_epsilon_curve(
    pairs: np.ndarray, a: RewardMatrix, b: RewardMatrix
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gap of the empirical joint play after each round: (epsilon, row raw, col raw)."""
    pairs = np.asarray(pairs, dtype=np.int64)
    rounds = pairs.shape[0]
    a_dense = a.to_dense()
    b_dense = b.to_dense()
    n = a_dense.shape[0]
    row_mix = np.zeros((n, n))
    col_mix = np.zeros((n, n))
    eps = np.empty(rounds)
    row_raw = np.empty(rounds)
    col_raw = np.empty(rounds)
    for t in range(rounds):
        i, j = pairs[t]
        row_mix[i] += a_dense[:, j]
        col_mix[j] += b_dense[i, :]
        rg = _best_offdiagonal_gain(row_mix) / (t + 1)
        cg = _best_offdiagonal_gain(col_mix) / (t + 1)
        row_raw[t] = rg
        col_raw[t] = cg
        eps[t] = max(0.0, rg, cg)
    return eps, row_raw, col_raw


@dataclass
class RegretReport:
    """Terminal regrets, per-round curves, and the update-rule decomposition."""

    external: float
    internal: float
    phi: float
    external_curve: np.ndarray
    internal_curve: np.ndarray
    phi_curve: np.ndarray
    best_action: int
    # The sign convention printed in some regret displays is the negation of
    # the comparator-minus-algorithm orientation used here; keep both.
    external_alt_orientation: float
    decomposition: dict | None = None


def build_report(history: MatchHistory, logs=None) -> RegretReport:
    """Compute all regret metrics for one seat; include the decomposition when
    per-round learner logs (with exact-mixture losses) are available."""
    ext, ext_curve = external_regret(history)
    internal_curve = internal_regret_curve(history)
    phi_curve = np.maximum(internal_curve, 0.0)
    decomposition = None
    if logs is not None and len(logs) == len(history) and all(
        log.loss_at_exact is not None for log in logs
    ):
        realized = np.cumsum([log.realized for log in logs])
        at_exact = np.cumsum([log.loss_at_exact for log in logs])
        at_sampled = np.cumsum([log.loss_at_sampled for log in logs])
        # Running max over the mixture simplex of the summed losses; the
        # identity vertex pins the max at the realized payoff or better.
        best_mixture = phi_curve + realized
        ftpl_curve = best_mixture - at_exact
        sampling_curve = at_exact - at_sampled
        fixedpoint_curve = at_sampled - realized
        decomposition = {
            "ftpl": float(ftpl_curve[-1]),
            "sampling": float(sampling_curve[-1]),
            "fixedpoint": float(fixedpoint_curve[-1]),
            "ftpl_curve": ftpl_curve,
            "sampling_curve": sampling_curve,
            "fixedpoint_curve": fixedpoint_curve,
            "residuals": np.array([log.residual for log in logs]),
            "epsilons": np.array([log.epsilon for log in logs]),
        }
    return RegretReport(
        external=ext,
        internal=float(internal_curve[-1]),
        phi=float(phi_curve[-1]),
        external_curve=ext_curve,
        internal_curve=internal_curve,
        phi_curve=phi_curve,
        best_action=best_fixed_action(history),
        external_alt_orientation=-ext,
        decomposition=decomposition,
    )
