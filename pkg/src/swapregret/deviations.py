"""Swap deviations on mixed strategies and the linearized per-round losses.

A swap pair (i, k) moves all probability mass on action i over to action k;
(i, i) is the identity. Sparse convex mixtures of pairs act on a strategy in
O(N + K), and the per-round loss seen by the pair-space learner is linear in
the mixture weights, so its gradient factors through the played strategy and
the observed payoff vector.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .games import MASS_TOL, MATRIX_DENSE_LIMIT, MixedStrategy

DeviationPair = tuple[int, int]

# Largest N for which objects sized N^2 (pair-space vectors, dense gradients)
# may be materialized.
PAIR_DENSE_LIMIT = 256


def _check_pair_space(n_actions: int, what: str) -> None:
    if n_actions > PAIR_DENSE_LIMIT:
        raise ConfigurationError(
            f"{what} requires materializing {n_actions}^2 pair entries "
            f"(limit N={PAIR_DENSE_LIMIT})"
        )


class DeviationWeights:
    """Sparse convex weights over swap pairs: a point of the N^2 simplex."""

    __slots__ = ("n_actions", "weights")

    def __init__(self, n_actions: int, weights: dict):
        if n_actions < 1:
            raise ConfigurationError("n_actions must be positive")
        cleaned = {}
        total = 0.0
        for (i, k), w in sorted(weights.items()):
            i, k = int(i), int(k)
            if not (0 <= i < n_actions and 0 <= k < n_actions):
                raise ConfigurationError(f"pair ({i}, {k}) out of range for N={n_actions}")
            w = float(w)
            if w < -MASS_TOL:
                raise ConfigurationError(f"negative weight {w} on pair ({i}, {k})")
            w = max(w, 0.0)
            cleaned[(i, k)] = cleaned.get((i, k), 0.0) + w
            total += w
        if abs(total - 1.0) > MASS_TOL:
            raise ConfigurationError(f"deviation weights sum to {total}, not 1")
        self.n_actions = int(n_actions)
        self.weights = cleaned

    @classmethod
    def point_mass(cls, i: int, k: int, n_actions: int) -> "DeviationWeights":
        return cls(n_actions, {(i, k): 1.0})

    @classmethod
    def identity(cls, n_actions: int) -> "DeviationWeights":
        """All mass on (0, 0): the no-deviation point of the simplex."""
        return cls(n_actions, {(0, 0): 1.0})

    @property
    def sparsity(self) -> int:
        return len(self.weights)

    def pairs(self):
        return self.weights.items()

    def as_dense(self) -> np.ndarray:
        """Dense (N, N) weight array, test scale only."""
        _check_pair_space(self.n_actions, "dense deviation weights")
        dense = np.zeros((self.n_actions, self.n_actions))
        for (i, k), w in self.weights.items():
            dense[i, k] = w
        return dense

    def __repr__(self):
        return f"DeviationWeights(n_actions={self.n_actions}, K={self.sparsity})"


def apply_pair(i: int, k: int, x: MixedStrategy) -> MixedStrategy:
    """Apply the single swap (i, k): mass on i joins k, everything else stays."""
    n = x.n_actions
    if not (0 <= i < n and 0 <= k < n):
        raise ConfigurationError(f"pair ({i}, {k}) out of range for N={n}")
    if i == k:
        return x
    support = dict(x.support)
    xi = support.get(i, x.tail_value)
    xk = support.get(k, x.tail_value)
    support[i] = 0.0
    support[k] = xi + xk
    return MixedStrategy(n, support, x.tail_value)


def apply_mixture(alpha: DeviationWeights, x: MixedStrategy) -> np.ndarray:
    """Dense image of x under the weighted swap mixture, in O(N + K)."""
    if alpha.n_actions != x.n_actions:
        raise ConfigurationError("deviation weights and strategy dimensions differ")
    out = x.to_dense()
    for (i, k), w in alpha.pairs():
        if i == k:
            continue
        moved = w * x.coordinate(i)
        out[i] -= moved
        out[k] += moved
    return out


def apply_mixture_sparse(alpha: DeviationWeights, x: MixedStrategy) -> MixedStrategy:
    """Same map as apply_mixture but staying in support-plus-tail form."""
    if alpha.n_actions != x.n_actions:
        raise ConfigurationError("deviation weights and strategy dimensions differ")
    support = dict(x.support)
    for (i, k), w in alpha.pairs():
        if i == k:
            continue
        moved = w * x.coordinate(i)
        support[i] = support.get(i, x.tail_value) - moved
        support[k] = support.get(k, x.tail_value) + moved
    return MixedStrategy(x.n_actions, support, x.tail_value)


def residual_l1(alpha: DeviationWeights, x: MixedStrategy) -> float:
    """||phi_alpha(x) - x||_1, summed over the touched coordinates only."""
    delta: dict[int, float] = {}
    for (i, k), w in alpha.pairs():
        if i == k:
            continue
        moved = w * x.coordinate(i)
        delta[i] = delta.get(i, 0.0) - moved
        delta[k] = delta.get(k, 0.0) + moved
    return float(sum(abs(v) for v in delta.values()))


def mixture_matrix(alpha: DeviationWeights) -> np.ndarray:
    """The mixture as a dense column-stochastic matrix (test scale only)."""
    n = alpha.n_actions
    if n > MATRIX_DENSE_LIMIT:
        raise ConfigurationError(
            f"refusing to build a dense {n}x{n} mixture matrix (limit {MATRIX_DENSE_LIMIT})"
        )
    mat = np.eye(n)
    for (i, k), w in alpha.pairs():
        if i == k:
            continue
        mat[i, i] -= w
        mat[k, i] += w
    return mat


class DeviationGradient:
    """Gradient of one round's linearized loss over the pair space.

    The entry for pair (i, k) is base + x(i) * (r(k) - r(i)), where base is
    the realized reward x . r shared by every pair. Stored factored through
    (x, r) so single entries cost O(1) and nothing of size N^2 is built
    unless explicitly requested.
    """

    __slots__ = ("strategy", "payoffs", "base")

    def __init__(self, strategy: MixedStrategy, payoffs: np.ndarray):
        payoffs = np.asarray(payoffs, dtype=np.float64)
        if payoffs.shape != (strategy.n_actions,):
            raise ConfigurationError("payoff vector length does not match the strategy")
        if np.any(payoffs < -MASS_TOL) or np.any(payoffs > 1.0 + MASS_TOL):
            raise ConfigurationError("payoff entries must lie in [0, 1]")
        self.strategy = strategy
        self.payoffs = payoffs
        self.base = float(strategy.to_dense() @ payoffs)

    @property
    def n_actions(self) -> int:
        return self.strategy.n_actions

    def pair_term(self, i: int, k: int) -> float:
        xi = self.strategy.coordinate(i)
        return xi * (float(self.payoffs[k]) - float(self.payoffs[i]))

    def entry(self, i: int, k: int) -> float:
        return self.base + self.pair_term(i, k)

    def pair_matrix(self) -> np.ndarray:
        """Dense (N, N) array of pair terms, test scale only."""
        _check_pair_space(self.n_actions, "dense gradient")
        x = self.strategy.to_dense()
        r = self.payoffs
        return np.outer(x, r) - np.outer(x * r, np.ones(self.n_actions))

    def dense(self) -> np.ndarray:
        return self.base + self.pair_matrix()


def loss_gradient(x: MixedStrategy, payoffs: np.ndarray) -> DeviationGradient:
    """Gradient of alpha -> reward of phi_alpha(x) against the observed payoffs."""
    return DeviationGradient(x, payoffs)


def evaluate_loss(alpha: DeviationWeights, x: MixedStrategy, payoffs: np.ndarray) -> float:
    """Reward of the deviated strategy phi_alpha(x), via linearity in alpha."""
    grad = loss_gradient(x, payoffs)
    return evaluate_loss_from_gradient(alpha, grad)


def evaluate_loss_from_gradient(alpha: DeviationWeights, grad: DeviationGradient) -> float:
    if alpha.n_actions != grad.n_actions:
        raise ConfigurationError("deviation weights and gradient dimensions differ")
    value = grad.base
    for (i, k), w in alpha.pairs():
        value += w * grad.pair_term(i, k)
    return float(value)


class CumulativeDeviationGradient:
    """Running sum over rounds of per-round pair-space gradients.

    Kept factored: a tail-weighted payoff accumulator of length N plus one
    excess row per support action ever played, so per-round updates cost
    O(|support| * N) and single-entry queries cost O(1). Dense (N, N) views
    are only materialized below the pair-space limit.
    """

    __slots__ = ("n_actions", "rounds", "base_total", "_tail_mix", "_excess_rows")

    def __init__(self, n_actions: int):
        self.n_actions = int(n_actions)
        self.rounds = 0
        self.base_total = 0.0
        self._tail_mix = np.zeros(n_actions)
        self._excess_rows: dict[int, np.ndarray] = {}

    def add(self, grad: DeviationGradient) -> None:
        if grad.n_actions != self.n_actions:
            raise ConfigurationError("gradient dimension does not match accumulator")
        x = grad.strategy
        r = grad.payoffs
        self._tail_mix += x.tail_value * r
        for i, v in x.support.items():
            excess = v - x.tail_value
            if excess == 0.0:
                continue
            row = self._excess_rows.get(i)
            if row is None:
                row = np.zeros(self.n_actions)
                self._excess_rows[i] = row
            row += excess * r
        self.base_total += grad.base
        self.rounds += 1

    def pair_total(self, i: int, k: int) -> float:
        """Sum over rounds of x_t(i) * (r_t(k) - r_t(i))."""
        value = float(self._tail_mix[k] - self._tail_mix[i])
        row = self._excess_rows.get(i)
        if row is not None:
            value += float(row[k] - row[i])
        return value

    def entry(self, i: int, k: int) -> float:
        """Cumulative gradient entry including the shared base term."""
        return self.base_total + self.pair_total(i, k)

    def pair_totals(self) -> np.ndarray:
        """Dense (N, N) array of pair totals, below the pair-space limit."""
        _check_pair_space(self.n_actions, "dense cumulative gradient")
        totals = self._tail_mix[None, :] - self._tail_mix[:, None]
        for i, row in self._excess_rows.items():
            totals[i] += row - row[i]
        return totals

    def vertex_totals(self) -> np.ndarray:
        """Cumulative value of each pair vertex: base total plus pair totals."""
        return self.base_total + self.pair_totals()

    def max_pair_total(self) -> float:
        """Largest pair total over all (i, k); the diagonal pins it at >= 0."""
        tail = self._tail_mix
        # Rows without an excess correction share max_k tail[k] - tail[i].
        plain = np.ones(self.n_actions, dtype=bool)
        best = 0.0
        for i, row in self._excess_rows.items():
            plain[i] = False
            gains = (tail - tail[i]) + (row - row[i])
            best = max(best, float(gains.max()))
        if np.any(plain):
            best = max(best, float(tail.max() - tail[plain].min()))
        return max(best, 0.0)
