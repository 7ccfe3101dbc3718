"""Property suites: machine-checkable verification of the core guarantees.

Each suite exercises one load-bearing mathematical fact behind the learner
(fixed-point residuals, the perturbed-argmax/softmax identity, extreme-value
means, the softmax Lipschitz bound, sampling accuracy of the mixture
estimate, and the regret decomposition audit) and reports measured slack
against an explicit bound. The CLI runs them via ``verify --suite <name>``;
the test suite reuses the same checks at acceptance scale.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig, SeatSpec
from .deviations import (
    CumulativeDeviationGradient,
    DeviationWeights,
    loss_gradient,
    residual_l1,
)
from .experiment import play_match
from .fixed_point import extract_support, fixed_point, power_iteration_oracle
from .games import MixedStrategy
from .metrics import build_report
from .perturbation import (
    EULER_GAMMA,
    OracleQuery,
    exact_softmax_probs,
    gumbel_sample,
    softmax_lipschitz_gap,
)


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    measured: float
    bound: float
    note: str = ""

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.measured = float(self.measured)
        self.bound = float(self.bound)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.suite}/{self.name} measured={self.measured:.6g} bound={self.bound:.6g}"
        if self.note:
            text += f" ({self.note})"
        return text


def random_deviation_weights(
    n_actions: int, sparsity: int, rng: np.random.Generator
) -> DeviationWeights:
    """Random sparse simplex point over distinct off-diagonal swap pairs."""
    pairs = set()
    while len(pairs) < sparsity:
        i, k = rng.integers(0, n_actions, size=2)
        if i != k:
            pairs.add((int(i), int(k)))
    raw = rng.dirichlet(np.ones(len(pairs)))
    return DeviationWeights(n_actions, dict(zip(sorted(pairs), raw)))


# --------------------------------------------------------------------------
# suite: fixed-point

def fixed_point_checks(
    cases: int = 30,
    n_grid=(50, 1000),
    k_grid=(1, 5, 20),
    epsilon: float = 1e-6,
    power_iterations: int = 2000,
    seed: int = 20240,
    time_budget_s: float | None = None,
) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    worst_residual = 0.0
    worst_margin = -np.inf  # residual minus (oracle residual + epsilon)
    support_ok = True
    slowest = 0.0
    combos = [(n, k) for n in n_grid for k in k_grid if k < n]
    for case in range(cases):
        n, k = combos[case % len(combos)]
        alpha = random_deviation_weights(n, k, rng)
        started = time.perf_counter()
        strategy = fixed_point(alpha, epsilon)
        slowest = max(slowest, time.perf_counter() - started)
        residual = residual_l1(alpha, strategy)
        worst_residual = max(worst_residual, residual)
        support = extract_support(alpha)
        support_ok = support_ok and support.size <= 2 * k
        _, _, oracle_residual = power_iteration_oracle(alpha, power_iterations)
        worst_margin = max(worst_margin, residual - (oracle_residual + epsilon))
    results = [
        CheckResult("fixed-point", "residual", worst_residual <= epsilon, worst_residual, epsilon),
        CheckResult(
            "fixed-point",
            "beats-power-iteration",
            worst_margin <= 0.0,
            worst_margin,
            0.0,
            "residual minus (oracle residual + epsilon)",
        ),
        CheckResult("fixed-point", "support-bound", support_ok, 0.0 if support_ok else 1.0, 0.0,
                    "support size at most twice the sparsity"),
    ]
    if time_budget_s is not None:
        results.append(
            CheckResult("fixed-point", "per-call-time", slowest < time_budget_s, slowest, time_budget_s)
        )
    return results


# --------------------------------------------------------------------------
# suite: softmax-identity (perturbed argmax frequencies match the softmax)

def softmax_identity_check(
    n_actions: int = 3,
    samples: int = 100_000,
    tv_bound: float = 0.02,
    seed: int = 7071,
) -> CheckResult:
    rng = np.random.default_rng(seed)
    grad = CumulativeDeviationGradient(n_actions)
    # A couple of rounds of plausible play gives a non-trivial score vector.
    for _ in range(3):
        x = MixedStrategy.from_dense(rng.dirichlet(np.ones(n_actions)))
        r = rng.random(n_actions)
        grad.add(loss_gradient(x, r))
    query = OracleQuery(grad, eta=1.5)
    probs = exact_softmax_probs(query).ravel()
    scores = query.scores().ravel()
    counts = np.zeros(scores.size, dtype=np.int64)
    block = 20_000
    remaining = samples
    while remaining > 0:
        rows = min(block, remaining)
        noise = gumbel_sample(rng, (rows, scores.size))
        winners = np.argmax(scores[None, :] + noise, axis=1)
        counts += np.bincount(winners, minlength=scores.size)
        remaining -= rows
    tv = 0.5 * float(np.abs(counts / samples - probs).sum())
    return CheckResult("softmax-identity", "total-variation", tv <= tv_bound, tv, tv_bound)


# --------------------------------------------------------------------------
# suite: gumbel-max-mean (max of m iid standard Gumbels has mean ln m + gamma)

def gumbel_max_mean_check(
    m: int = 9,
    trials: int = 100_000,
    tolerance: float = 0.02,
    seed: int = 99,
) -> CheckResult:
    rng = np.random.default_rng(seed)
    total = 0.0
    block = 20_000
    remaining = trials
    while remaining > 0:
        rows = min(block, remaining)
        total += gumbel_sample(rng, (rows, m)).max(axis=1).sum()
        remaining -= rows
    mean = total / trials
    expected = math.log(m) + EULER_GAMMA
    error = abs(mean - expected)
    return CheckResult(
        "gumbel-max-mean", "mean-error", error <= tolerance, error, tolerance,
        f"expected {expected:.4f}",
    )


# --------------------------------------------------------------------------
# suite: softmax-lipschitz

def softmax_lipschitz_check(
    pairs: int = 10_000,
    max_dim: int = 100,
    magnitude: float = 50.0,
    slack: float = 1e-12,
    seed: int = 4242,
) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(pairs):
        dim = int(rng.integers(2, max_dim + 1))
        x = rng.uniform(-magnitude, magnitude, size=dim)
        y = rng.uniform(-magnitude, magnitude, size=dim)
        worst = min(worst, softmax_lipschitz_gap(x, y))
    return CheckResult(
        "softmax-lipschitz", "min-slack", worst >= -slack, worst, -slack,
        "slack of 2*||x-y||_inf minus ||softmax(x)-softmax(y)||_1",
    )


# --------------------------------------------------------------------------
# suite: sampling-gap (sampled mixture tracks its exact expectation)

def sampling_gap_check(
    rounds: int = 200,
    n_actions: int = 3,
    delta: float = 0.1,
    seed: int = 314,
) -> CheckResult:
    samples = int(math.ceil(rounds * math.log(rounds / delta)))
    config = ExperimentConfig(
        game=f"generated:uniform:{seed}:{n_actions}",
        row=SeatSpec("internal"),
        col=SeatSpec("uniform"),
        rounds=rounds,
        samples=samples,
        eta="auto",
        seed=seed,
    )
    result, _, _, _ = play_match(config)
    logs = result.row_logs
    gap = abs(
        sum(log.loss_at_exact for log in logs) - sum(log.loss_at_sampled for log in logs)
    )
    bound = math.sqrt(rounds)
    return CheckResult(
        "sampling-gap", "trajectory-gap", gap <= bound, gap, bound,
        f"S={samples} samples per round",
    )


# --------------------------------------------------------------------------
# suite: regret-decomposition

def regret_decomposition_checks(
    rounds: int = 300,
    seed: int = 11,
    game: str = "shapley",
) -> list[CheckResult]:
    config = ExperimentConfig(
        game=game,
        row=SeatSpec("internal"),
        col=SeatSpec("internal"),
        rounds=rounds,
        samples=100,
        eta="auto",
        seed=seed,
    )
    result, _, _, _ = play_match(config)
    report = build_report(result.row_history, result.row_logs)
    decomp = report.decomposition
    identity_residual = abs(
        report.phi - (decomp["ftpl"] + decomp["sampling"] + decomp["fixedpoint"])
    )
    budget = float(np.cumsum(1.0 / np.sqrt(np.arange(1, rounds + 1)))[-1])
    bound_excess = report.phi - (decomp["ftpl"] + decomp["sampling"] + budget + 1e-9)
    residual_excess = float((decomp["residuals"] - decomp["epsilons"]).max())
    return [
        CheckResult(
            "regret-decomposition", "identity", identity_residual <= 1e-9,
            identity_residual, 1e-9,
            "swap regret equals leader + sampling + fixed-point terms",
        ),
        CheckResult(
            "regret-decomposition", "budget", bound_excess <= 0.0, bound_excess, 0.0,
            "swap regret within leader + sampling + sum of 1/sqrt(t)",
        ),
        CheckResult(
            "regret-decomposition", "residual-schedule", residual_excess <= 1e-12,
            residual_excess, 0.0,
            "per-round fixed-point residual within 1/sqrt(t)",
        ),
    ]


# --------------------------------------------------------------------------

SUITES = {
    "fixed-point": lambda: fixed_point_checks(),
    "softmax-identity": lambda: [softmax_identity_check()],
    "gumbel-max-mean": lambda: [gumbel_max_mean_check()],
    "softmax-lipschitz": lambda: [softmax_lipschitz_check()],
    "sampling-gap": lambda: [sampling_gap_check()],
    "regret-decomposition": lambda: regret_decomposition_checks(),
}


def run_suite(name: str) -> list[CheckResult]:
    if name == "all":
        results = []
        for suite_name in SUITES:
            results.extend(SUITES[suite_name]())
        return results
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name]()
