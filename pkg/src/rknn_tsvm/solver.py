"""Clipping dual coordinate descent for box-constrained convex QPs.

Solves

    min_a  f(a) = 1/2 a'Qa - e'a    s.t.  0 <= a <= c

by updating one coordinate per iteration, the one with the largest possible
objective decrease among the coordinates that can still move.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-5


@dataclass(frozen=True)
class DualProblem:
    q_matrix: np.ndarray
    linear_term: np.ndarray
    upper_bound: float

    def __post_init__(self):
        Q = np.asarray(self.q_matrix, dtype=float)
        e = np.asarray(self.linear_term, dtype=float).ravel()
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] != e.shape[0]:
            raise ValueError(f"shape mismatch: Q {Q.shape}, e {e.shape}")
        if not (np.isfinite(Q).all() and np.isfinite(e).all()):
            raise ValueError("non-finite entries in the dual problem")
        if Q.size and not np.all(np.diag(Q) > 0):
            raise ValueError("Q has a non-positive diagonal entry; not positive definite")
        if Q.size and np.max(np.abs(Q - Q.T)) > 1e-10 * max(1.0, np.max(np.abs(Q))):
            raise ValueError("Q is not symmetric")
        if self.upper_bound < 0:
            raise ValueError("upper bound must be non-negative")
        object.__setattr__(self, "q_matrix", Q)
        object.__setattr__(self, "linear_term", e)

    @property
    def size(self) -> int:
        return self.linear_term.shape[0]

    def objective(self, alpha) -> float:
        alpha = np.asarray(alpha, dtype=float)
        return float(0.5 * alpha @ self.q_matrix @ alpha - self.linear_term @ alpha)

    def gradient(self, alpha) -> np.ndarray:
        return self.q_matrix @ alpha - self.linear_term


@dataclass
class SolverReport:
    alpha: np.ndarray
    iterations: int
    final_criterion: float
    converged: bool
    objective_trace: list = field(default_factory=list)
    steps: list = field(default_factory=list)  # (index, lambda, clipped) per iteration, when traced


def clipdcd_solve(p: DualProblem, tol: float = DEFAULT_TOL, max_iter: int | None = None,
                  trace: bool = False) -> SolverReport:
    """Run clipDCD from a = 0.

    Stops when the best achievable step score ``(e_L - (Qa)_L)^2 / Q_LL`` drops
    below ``tol``, when no coordinate can move, or after ``max_iter`` updates
    (default ``5000 * m``). With ``trace`` the objective after every update is
    recorded.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    m = p.size
    if max_iter is None:
        max_iter = 5000 * max(m, 1)
    if max_iter <= 0:
        raise ValueError("max_iter must be positive")
    Q, e, c = p.q_matrix, p.linear_term, float(p.upper_bound)
    alpha = np.zeros(m)
    if m == 0 or c == 0:
        return SolverReport(alpha, 0, 0.0, True)

    diag = np.ascontiguousarray(np.diag(Q))
    resid = e.copy()  # e - Q alpha, kept up to date with one column per step
    obj = 0.0
    report = SolverReport(alpha, 0, np.inf, False)
    if trace:
        report.objective_trace.append(obj)

    it = 0
    while it < max_iter:
        lam = resid / diag
        movable = ((alpha > 0) & (lam < 0)) | ((alpha < c) & (lam > 0))
        score = np.where(movable, resid * lam, -1.0)
        L = int(np.argmax(score))  # first index on ties
        best = score[L]
        if best < 0:
            report.final_criterion = 0.0
            report.converged = True
            break
        report.final_criterion = float(best)
        if best < tol:
            report.converged = True
            break
        old = alpha[L]
        new = min(max(old + lam[L], 0.0), c)
        delta = new - old
        if delta == 0.0:
            # the only movable coordinate cannot move in floating point
            report.converged = True
            break
        obj += 0.5 * delta * delta * diag[L] - delta * resid[L]
        alpha[L] = new
        resid -= delta * Q[L]  # row L == column L, Q symmetric
        it += 1
        if trace:
            report.objective_trace.append(obj)
            report.steps.append((L, float(lam[L]), new != old + lam[L]))
    report.iterations = it
    return report


def kkt_residual(p: DualProblem, alpha) -> float:
    """Largest violation of the box KKT conditions at ``alpha``."""
    alpha = np.asarray(alpha, dtype=float)
    g = p.gradient(alpha)
    c = p.upper_bound
    lower = alpha <= 0
    upper = alpha >= c
    viol = np.where(lower & upper, 0.0,
                    np.where(lower, np.maximum(-g, 0.0), np.where(upper, np.maximum(g, 0.0), np.abs(g))))
    return float(viol.max()) if viol.size else 0.0


def qp_oracle_solve(p: DualProblem, tol: float = 1e-10, max_iter: int = 1_000_000) -> np.ndarray:
    """Accelerated projected gradient with restarts; a reference solver for small problems."""
    m = p.size
    if m > 200:
        raise ValueError("the oracle is meant for small problems")
    Q, e, c = p.q_matrix, p.linear_term, float(p.upper_bound)
    x = np.zeros(m)
    if m == 0 or c == 0:
        return x
    step = 1.0 / np.linalg.eigvalsh(Q)[-1]
    y, t = x.copy(), 1.0
    for _ in range(max_iter):
        x_new = np.clip(y - step * (Q @ y - e), 0.0, c)
        if kkt_residual(p, x_new) < tol:
            return x_new
        if (x_new - x) @ (y - x_new) > 0:
            # momentum points uphill: restart
            y, t = x_new.copy(), 1.0
        else:
            t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            y = x_new + ((t - 1.0) / t_new) * (x_new - x)
            t = t_new
        x = x_new
    return x
