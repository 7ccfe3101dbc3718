"""Gumbel perturbations, the perturbed-argmax oracles, and softmax checks.

The deterministic perturbed-leader update is an expectation of argmaxes of
noised cumulative gradients; with standard Gumbel noise that expectation is
exactly the softmax of the gradients, which gives an exact reference each
sampled estimate can be verified against. Argmax scores drop the component
shared by every pair (the realized reward), since both argmax and softmax
are invariant to constant shifts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deviations import PAIR_DENSE_LIMIT, CumulativeDeviationGradient, DeviationWeights
from .errors import ConfigurationError

EULER_GAMMA = float(np.euler_gamma)

# Rows per block when drawing large noise panels, to bound peak memory.
_NOISE_BLOCK_FLOATS = 4_000_000


def gumbel_from_uniform(u):
    """Inverse CDF of the standard Gumbel: -ln(-ln(u)) for u in (0, 1)."""
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ConfigurationError("uniform input must lie strictly inside (0, 1)")
    out = -np.log(-np.log(u))
    return float(out) if out.ndim == 0 else out


def gumbel_sample(rng: np.random.Generator, size=None):
    """Standard Gumbel variates from a seeded stream."""
    u = rng.random(size)
    # rng.random lives in [0, 1); nudge exact zeros into the open interval.
    u = np.where(u <= 0.0, np.nextafter(0.0, 1.0), u)
    out = -np.log(-np.log(u))
    return float(out) if size is None else out


def softmax(scores) -> np.ndarray:
    """Numerically stable softmax over all entries, preserving shape."""
    z = np.asarray(scores, dtype=np.float64)
    shifted = z - z.max()
    e = np.exp(shifted)
    return e / e.sum()


def softmax_lipschitz_gap(x, y) -> float:
    """Slack of ||softmax(x) - softmax(y)||_1 <= 2 ||x - y||_inf (>= 0 when it holds)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    lhs = float(np.abs(softmax(x) - softmax(y)).sum())
    rhs = 2.0 * float(np.abs(x - y).max())
    return rhs - lhs


def default_eta(n_actions: int, horizon: int) -> float:
    """Step size sqrt(ln N / T) balancing perturbation drift against noise range."""
    if n_actions < 2 or horizon < 1:
        raise ConfigurationError("eta default needs N >= 2 and T >= 1")
    return float(np.sqrt(np.log(n_actions) / horizon))


def anytime_eta(n_actions: int, t: int) -> float:
    """Horizon-free variant of the default step size, using the current round."""
    if n_actions < 2 or t < 1:
        raise ConfigurationError("eta needs N >= 2 and t >= 1")
    return float(np.sqrt(np.log(n_actions) / t))


@dataclass(frozen=True)
class OracleQuery:
    """What an internal-deviation oracle sees: cumulative gradients and a step size."""

    gradient: CumulativeDeviationGradient
    eta: float

    def scores(self) -> np.ndarray:
        """Scaled pair scores (N, N); the across-pair constant is dropped."""
        return self.eta * self.gradient.pair_totals()


def smooth_internal_oracle(query: OracleQuery, noise: np.ndarray) -> tuple[int, int]:
    """Pair maximizing eta * cumulative gradient + noise; ties go to the lowest pair."""
    n = query.gradient.n_actions
    noise = np.asarray(noise, dtype=np.float64)
    if noise.size != n * n:
        raise ConfigurationError(f"noise must provide one variate per pair ({n * n})")
    flat = query.scores().ravel() + noise.ravel()
    winner = int(np.argmax(flat))
    return divmod(winner, n)


def pure_internal_oracle(gradient: CumulativeDeviationGradient) -> tuple[int, int]:
    """Exact argmax over pairs of the cumulative gradient, no noise."""
    n = gradient.n_actions
    winner = int(np.argmax(gradient.pair_totals().ravel()))
    return divmod(winner, n)


def sampled_mixture(
    query: OracleQuery,
    num_samples: int,
    rng: np.random.Generator,
) -> DeviationWeights:
    """Average of ``num_samples`` perturbed-argmax vertices: a sparse simplex point.

    Each sample draws fresh Gumbel noise per pair, so with an empty gradient
    (the first round) this reduces to pure-noise argmaxes. Sparsity is at
    most ``num_samples``.
    """
    if num_samples < 1:
        raise ConfigurationError("need at least one sample")
    n = query.gradient.n_actions
    n_pairs = n * n
    scores = query.scores().ravel()
    counts = np.zeros(n_pairs, dtype=np.int64)
    block = max(1, _NOISE_BLOCK_FLOATS // n_pairs)
    remaining = num_samples
    while remaining > 0:
        rows = min(block, remaining)
        noise = gumbel_sample(rng, (rows, n_pairs))
        winners = np.argmax(scores[None, :] + noise, axis=1)
        counts += np.bincount(winners, minlength=n_pairs)
        remaining -= rows
    weights = {}
    for flat in np.flatnonzero(counts):
        i, k = divmod(int(flat), n)
        weights[(i, k)] = counts[flat] / num_samples
    return DeviationWeights(n, weights)


def exact_softmax_probs(query: OracleQuery) -> np.ndarray:
    """Exact expectation of the perturbed argmax as an (N, N) probability array."""
    n = query.gradient.n_actions
    if n > PAIR_DENSE_LIMIT:
        raise ConfigurationError(
            f"exact softmax over {n}^2 pairs exceeds the dense limit {PAIR_DENSE_LIMIT}"
        )
    return softmax(query.scores())


def exact_softmax_mixture(query: OracleQuery) -> DeviationWeights:
    """exact_softmax_probs packaged as (dense) deviation weights."""
    probs = exact_softmax_probs(query)
    n = probs.shape[0]
    weights = {(i, k): float(probs[i, k]) for i in range(n) for k in range(n)}
    return DeviationWeights(n, weights)


def smooth_external_oracle(payoff_sums: np.ndarray, eta: float, noise: np.ndarray) -> int:
    """Action maximizing eta * cumulative payoff + noise; ties to the lowest index."""
    payoff_sums = np.asarray(payoff_sums, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != payoff_sums.shape:
        raise ConfigurationError("noise and payoff sums must have matching shapes")
    return int(np.argmax(eta * payoff_sums + noise))


def pure_external_oracle(payoff_sums: np.ndarray) -> int:
    return int(np.argmax(np.asarray(payoff_sums, dtype=np.float64)))
