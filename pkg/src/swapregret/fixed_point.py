"""Approximate fixed points of sparse swap mixtures.

A mixture phi_alpha only moves probability between the actions named by its
off-diagonal pairs, so ||phi_alpha(x) - x||_1 depends on x only through those
coordinates. Minimizing that residual over the support is a linear program
in O(K) variables; everything off the support is filled with a uniform tail.
The restricted block of phi_alpha is column-stochastic, hence a residual of
exactly zero is always attainable and the solver's achieved objective is the
residual guarantee.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deviations import DeviationWeights
from .errors import ConfigurationError, SolverFailure
from .games import MixedStrategy
from .lp import solve_bounded_lp

DEFAULT_POWER_ITERATIONS = 10_000


def extract_support(alpha: DeviationWeights) -> np.ndarray:
    """Sorted actions appearing in any off-diagonal pair of alpha."""
    actions = set()
    for (i, k), w in alpha.pairs():
        if i != k and w > 0.0:
            actions.add(i)
            actions.add(k)
    return np.array(sorted(actions), dtype=np.int64)


@dataclass
class L1Program:
    """Residual-minimization program restricted to the support actions.

    residual[p, q] is row support[p], column support[q] of (phi_alpha - I);
    the variables are the strategy values on the support, bounded to [0, 1]
    with total mass at most one (exactly one when the support is all of [N]).
    """

    support: np.ndarray
    residual: np.ndarray
    require_full_mass: bool
    epsilon: float


def build_restricted_residual(
    alpha: DeviationWeights,
    support: np.ndarray | None = None,
    epsilon: float = 1e-6,
) -> L1Program:
    if support is None:
        support = extract_support(alpha)
    m = support.size
    pos = {int(a): p for p, a in enumerate(support)}
    residual = np.zeros((m, m))
    for (i, k), w in alpha.pairs():
        if i == k or w == 0.0:
            continue
        residual[pos[i], pos[i]] -= w
        residual[pos[k], pos[i]] += w
    return L1Program(
        support=support,
        residual=residual,
        require_full_mass=(m == alpha.n_actions),
        epsilon=float(epsilon),
    )


def solve_l1(program: L1Program, max_iter: int = 10_000):
    """Minimize sum_j |row_j . x| over the program's box; returns (x, objective).

    Reformulated with one auxiliary variable per row bounding the absolute
    value, then solved by the bounded-variable simplex.
    """
    m = program.support.size
    if m == 0:
        return np.zeros(0), 0.0
    R = program.residual
    # Variables z = [x (m), t (m)]; minimize sum t with |R x| <= t rowwise.
    c = np.concatenate([np.zeros(m), np.ones(m)])
    A_rows = []
    for j in range(m):
        A_rows.append(np.concatenate([R[j], -np.eye(m)[j]]))
        A_rows.append(np.concatenate([-R[j], -np.eye(m)[j]]))
    mass_row = np.concatenate([np.ones(m), np.zeros(m)])
    lower = np.zeros(2 * m)
    upper = np.concatenate([np.ones(m), np.full(m, np.inf)])
    if program.require_full_mass:
        solution = solve_bounded_lp(
            c,
            A_ub=np.array(A_rows),
            b_ub=np.zeros(2 * m),
            A_eq=mass_row[None, :],
            b_eq=np.array([1.0]),
            lower=lower,
            upper=upper,
            max_iter=max_iter,
        )
    else:
        A_ub = np.vstack([np.array(A_rows), mass_row])
        solution = solve_bounded_lp(
            c,
            A_ub=A_ub,
            b_ub=np.concatenate([np.zeros(2 * m), [1.0]]),
            lower=lower,
            upper=upper,
            max_iter=max_iter,
        )
    x = np.clip(solution.z[:m], 0.0, 1.0)
    objective = float(np.abs(R @ x).sum())
    return x, objective


def fixed_point(alpha: DeviationWeights, epsilon: float = 1e-6) -> MixedStrategy:
    """Strategy x with ||phi_alpha(x) - x||_1 <= epsilon, in support-tail form.

    Coordinate queries on the result cost O(|support|); the off-support tail
    is uniform.
    """
    if epsilon <= 0.0:
        raise ConfigurationError("epsilon must be positive")
    n = alpha.n_actions
    support = extract_support(alpha)
    if support.size == 0:
        return MixedStrategy.uniform(n)
    program = build_restricted_residual(alpha, support, epsilon)
    x_hat, objective = solve_l1(program)
    if objective > epsilon:
        raise SolverFailure(
            f"fixed-point residual {objective:.3e} exceeds epsilon {epsilon:.3e}",
            incumbent=x_hat,
            objective=objective,
        )
    mass = float(x_hat.sum())
    if support.size == n:
        tail = 0.0
    else:
        tail = max(0.0, (1.0 - mass) / (n - support.size))
    values = dict(zip(support.tolist(), x_hat.tolist()))
    return MixedStrategy(n, values, tail)


def power_iteration_oracle(
    alpha: DeviationWeights,
    iterations: int = DEFAULT_POWER_ITERATIONS,
):
    """Independent check: iterate the restricted column-stochastic block.

    Repeatedly applies the support block of phi_alpha from a uniform start,
    tracking the best iterate and the running average (the average of a
    stochastic-matrix orbit always has vanishing residual). Returns
    (support, best iterate, best residual). Verification only; the production
    path goes through the linear program.
    """
    support = extract_support(alpha)
    m = support.size
    if m == 0:
        return support, np.zeros(0), 0.0
    program = build_restricted_residual(alpha, support)
    block = np.eye(m) + program.residual
    x = np.full(m, 1.0 / m)
    total = np.zeros(m)
    best_x, best_res = x.copy(), float(np.abs(block @ x - x).sum())
    for it in range(1, iterations + 1):
        x = block @ x
        res = float(np.abs(block @ x - x).sum())
        if res < best_res:
            best_x, best_res = x.copy(), res
        if best_res < 1e-15:
            break
        total += x
        if it == iterations:
            avg = total / it
            avg_res = float(np.abs(block @ avg - avg).sum())
            if avg_res < best_res:
                best_x, best_res = avg, avg_res
    return support, best_x, best_res
