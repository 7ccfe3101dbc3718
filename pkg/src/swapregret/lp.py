"""Bounded-variable two-phase simplex for small dense linear programs.

Minimizes c . z subject to A_ub z <= b_ub, A_eq z = b_eq and box bounds
lower <= z <= upper. Sized for the tiny programs this package produces
(tens of variables), so every iteration refactorizes the basis for
robustness. Entering and leaving choices follow Bland's lowest-index rule,
which rules out cycling under the degeneracy these programs routinely have.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure

_RCOST_TOL = 1e-9
_PIVOT_TOL = 1e-11
_TIE_TOL = 1e-9
_FEAS_TOL = 1e-8


@dataclass
class LPSolution:
    z: np.ndarray
    objective: float
    iterations: int
    phase1_iterations: int


class _Program:
    """Working state: structural + slack + artificial columns."""

    def __init__(self, c, A_ub, b_ub, A_eq, b_eq, lower, upper):
        c = np.asarray(c, dtype=np.float64)
        n = c.size
        A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=np.float64)
        b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=np.float64)
        A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=np.float64)
        b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=np.float64)
        m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
        m = m_ub + m_eq

        lower = np.zeros(n) if lower is None else np.asarray(lower, dtype=np.float64)
        upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=np.float64)
        if np.any(~np.isfinite(lower)):
            raise ValueError("structural variables need finite lower bounds")
        if np.any(lower > upper):
            raise ValueError("lower bound exceeds upper bound")

        G = np.zeros((m, n + m_ub))
        G[:m_ub, :n] = A_ub
        G[m_ub:, :n] = A_eq
        G[:m_ub, n : n + m_ub] = np.eye(m_ub)
        h = np.concatenate([b_ub, b_eq])

        lo = np.concatenate([lower, np.zeros(m_ub)])
        hi = np.concatenate([upper, np.full(m_ub, np.inf)])

        # Start every structural variable at its lower bound; rows whose slack
        # start would be negative (and every equality row) get an artificial.
        x = np.concatenate([lower.copy(), np.zeros(m_ub)])
        resid = h - G @ x
        basis = []
        art_cols = []
        for row in range(m):
            if row < m_ub and resid[row] >= 0.0:
                slack = n + row
                x[slack] = resid[row]
                basis.append(slack)
            else:
                sign = 1.0 if resid[row] >= 0.0 else -1.0
                col = np.zeros((m, 1))
                col[row, 0] = sign
                G = np.hstack([G, col])
                idx = G.shape[1] - 1
                art_cols.append(idx)
                lo = np.append(lo, 0.0)
                hi = np.append(hi, np.inf)
                x = np.append(x, abs(resid[row]))
                basis.append(idx)

        self.n = n
        self.c = c
        self.G = G
        self.h = h
        self.lo = lo
        self.hi = hi
        self.x = x
        self.basis = np.array(basis, dtype=np.int64)
        self.at_upper = np.zeros(G.shape[1], dtype=bool)
        self.artificials = np.array(art_cols, dtype=np.int64)

    def full_cost(self, phase1: bool) -> np.ndarray:
        cost = np.zeros(self.G.shape[1])
        if phase1:
            cost[self.artificials] = 1.0
        else:
            cost[: self.n] = self.c
        return cost


def _simplex(prog: _Program, cost: np.ndarray, banned: set, max_iter: int) -> int:
    """Run simplex iterations in place; returns the iteration count."""
    G, h, lo, hi = prog.G, prog.h, prog.lo, prog.hi
    m = G.shape[0]
    if m == 0:
        # Pure box problem: each variable sits at whichever bound its cost favors.
        for j in range(prog.n):
            if cost[j] < 0.0:
                if not np.isfinite(hi[j]):
                    raise SolverFailure("unbounded box minimization", incumbent=prog.x.copy())
                prog.x[j] = hi[j]
                prog.at_upper[j] = True
        return 0

    iters = 0
    while True:
        if iters >= max_iter:
            raise SolverFailure(
                f"simplex iteration cap {max_iter} exceeded",
                incumbent=prog.x[: prog.n].copy(),
                objective=float(cost[: prog.n] @ prog.x[: prog.n]),
            )
        basis = prog.basis
        B = G[:, basis]
        try:
            y = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError as exc:
            raise SolverFailure("singular basis", incumbent=prog.x[: prog.n].copy()) from exc
        reduced = cost - y @ G

        in_basis = np.zeros(G.shape[1], dtype=bool)
        in_basis[basis] = True
        entering = -1
        sigma = 0.0
        for j in range(G.shape[1]):
            if in_basis[j] or j in banned or hi[j] - lo[j] <= 0.0:
                continue
            if not prog.at_upper[j] and reduced[j] < -_RCOST_TOL:
                entering, sigma = j, 1.0
                break
            if prog.at_upper[j] and reduced[j] > _RCOST_TOL:
                entering, sigma = j, -1.0
                break
        if entering < 0:
            return iters

        w = np.linalg.solve(B, G[:, entering])

        # Candidate steps: the entering variable's own span, then each basic
        # variable hitting one of its bounds. (var index, step, leaving info)
        candidates = [(entering, hi[entering] - lo[entering], -1, False)]
        for p in range(m):
            b = basis[p]
            delta = sigma * w[p]
            if delta > _PIVOT_TOL:
                step = (prog.x[b] - lo[b]) / delta
                candidates.append((b, max(step, 0.0), p, False))
            elif delta < -_PIVOT_TOL and np.isfinite(hi[b]):
                step = (hi[b] - prog.x[b]) / (-delta)
                candidates.append((b, max(step, 0.0), p, True))

        theta = min(step for _, step, _, _ in candidates)
        if not np.isfinite(theta):
            raise SolverFailure(
                "objective unbounded below",
                incumbent=prog.x[: prog.n].copy(),
                objective=float(cost[: prog.n] @ prog.x[: prog.n]),
            )
        # Bland: among the tight candidates, leave with the lowest variable index.
        leaving_var, _, leaving_pos, to_upper = min(
            (cand for cand in candidates if cand[1] <= theta + _TIE_TOL),
            key=lambda cand: cand[0],
        )

        prog.x[entering] += sigma * theta
        prog.x[basis] -= sigma * theta * w
        if leaving_var == entering:
            prog.at_upper[entering] = not prog.at_upper[entering]
            prog.x[entering] = hi[entering] if prog.at_upper[entering] else lo[entering]
        else:
            prog.x[leaving_var] = hi[leaving_var] if to_upper else lo[leaving_var]
            prog.at_upper[leaving_var] = to_upper
            prog.basis[leaving_pos] = entering
        iters += 1


def _refine(prog: _Program) -> None:
    """Recompute basic values from the final basis to shed pivot round-off."""
    if prog.G.shape[0] == 0:
        return
    xx = prog.x.copy()
    xx[prog.basis] = 0.0
    rhs = prog.h - prog.G @ xx
    try:
        prog.x[prog.basis] = np.linalg.solve(prog.G[:, prog.basis], rhs)
    except np.linalg.LinAlgError:
        pass


def solve_bounded_lp(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    lower=None,
    upper=None,
    max_iter: int = 10_000,
) -> LPSolution:
    """Minimize c . z over A_ub z <= b_ub, A_eq z = b_eq, lower <= z <= upper.

    Raises SolverFailure (with the best feasible incumbent) if the iteration
    cap is hit, and ValueError if the program is infeasible.
    """
    prog = _Program(c, A_ub, b_ub, A_eq, b_eq, lower, upper)
    banned: set = set()
    phase1_iters = 0
    if prog.artificials.size:
        phase1_iters = _simplex(prog, prog.full_cost(phase1=True), banned, max_iter)
        infeas = float(prog.x[prog.artificials].sum())
        if infeas > _FEAS_TOL:
            raise ValueError(f"infeasible program (phase-1 objective {infeas:.3e})")
        # Pin artificials at zero; they may linger in the basis but cannot move.
        prog.x[prog.artificials] = 0.0
        prog.hi[prog.artificials] = 0.0
        banned = set(prog.artificials.tolist())
    iters = _simplex(prog, prog.full_cost(phase1=False), banned, max_iter)
    _refine(prog)
    z = prog.x[: prog.n].copy()
    return LPSolution(
        z=z,
        objective=float(prog.c @ z),
        iterations=iters,
        phase1_iterations=phase1_iters,
    )
