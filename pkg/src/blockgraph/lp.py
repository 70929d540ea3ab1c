"""Dense two-phase simplex for small linear programs.

Solves ``min c^T x`` subject to ``A_ub x <= b_ub`` and ``x >= 0``. Pivoting
follows Bland's rule (lowest eligible index enters, ties in the ratio test
leave by lowest basic index), so the method terminates on degenerate problems
and is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailureError

PIVOT_TOL = 1e-11
COST_TOL = 1e-10
FEAS_TOL = 1e-9


class LPInfeasibleError(NumericalFailureError):
    pass


class LPUnboundedError(NumericalFailureError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    objective: float
    iterations: int
    basis: np.ndarray


class _Tableau:
    def __init__(self, M, rhs, basis):
        self.M = M
        self.rhs = rhs
        self.basis = basis
        self.iterations = 0

    def pivot(self, r, j, cost):
        M, rhs = self.M, self.rhs
        piv = M[r, j]
        M[r] /= piv
        rhs[r] /= piv
        col = M[:, j].copy()
        col[r] = 0.0
        M -= np.outer(col, M[r])
        rhs -= col * rhs[r]
        cost_val = cost[0][j]
        cost[0] -= cost_val * M[r]
        cost[1] -= cost_val * rhs[r]
        self.basis[r] = j
        self.iterations += 1

    def run(self, cost, allowed, max_iter):
        """Minimize with reduced-cost row ``cost = [row, -objective]`` over ``allowed`` columns."""
        while True:
            if self.iterations >= max_iter:
                raise NumericalFailureError(f"simplex iteration cap {max_iter} exceeded")
            red = cost[0]
            candidates = np.flatnonzero((red < -COST_TOL) & allowed)
            if candidates.size == 0:
                return
            j = candidates[0]
            col = self.M[:, j]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                raise LPUnboundedError("linear program is unbounded")
            ratios = self.rhs[rows] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + FEAS_TOL * max(1.0, abs(best))]
            r = tied[np.argmin(self.basis[tied])]
            self.pivot(r, j, cost)


def simplex(c, A_ub, b_ub, max_iter: int | None = None) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.asarray(A_ub, dtype=float)
    b = np.asarray(b_ub, dtype=float)
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (m + n) + 100

    # one slack per row; rows with negative rhs are negated and get an artificial
    neg = b < 0
    sign = np.where(neg, -1.0, 1.0)
    n_art = int(neg.sum())
    N = n + m + n_art
    M = np.zeros((m, N))
    M[:, :n] = A * sign[:, None]
    M[np.arange(m), n + np.arange(m)] = sign
    art_rows = np.flatnonzero(neg)
    art_cols = n + m + np.arange(n_art)
    M[art_rows, art_cols] = 1.0
    rhs = b * sign
    basis = n + np.arange(m)
    basis[art_rows] = art_cols
    tab = _Tableau(M, rhs, basis)

    if n_art:
        # phase 1: minimize the sum of artificials
        cost1 = np.zeros(N)
        cost1[art_cols] = 1.0
        row = cost1 - M[art_rows].sum(axis=0)
        cost = [row, -rhs[art_rows].sum()]
        tab.run(cost, np.ones(N, dtype=bool), max_iter)
        if -cost[1] > FEAS_TOL * max(1.0, np.abs(b).max()):
            raise LPInfeasibleError("linear program is infeasible")
        # pivot remaining (zero-level) artificials out of the basis
        for r in range(m):
            if tab.basis[r] >= n + m:
                nz = np.flatnonzero(np.abs(tab.M[r, : n + m]) > PIVOT_TOL)
                if nz.size:
                    tab.pivot(r, nz[0], [np.zeros(N), 0.0])
        keep = tab.basis < n + m
        tab.M = tab.M[keep][:, : n + m]
        tab.rhs = tab.rhs[keep]
        tab.basis = tab.basis[keep]
        N = n + m

    full_c = np.zeros(N)
    full_c[:n] = c
    cb = full_c[tab.basis]
    cost = [full_c - cb @ tab.M, -(cb @ tab.rhs)]
    tab.run(cost, np.ones(N, dtype=bool), max_iter)

    x_full = np.zeros(N)
    x_full[tab.basis] = tab.rhs
    x_full = _polish(A, b, n, tab.basis, x_full)
    x = np.maximum(x_full[:n], 0.0)
    return LPResult(x, float(c @ x), tab.iterations, tab.basis.copy())


def _polish(A, b, n, basis, x_full):
    """Re-solve the final basic system against the original data to remove pivoting drift."""
    m = A.shape[0]
    if basis.size != m:
        return x_full
    std = np.hstack([A, np.eye(m)])
    B = std[:, basis]
    try:
        xb = np.linalg.solve(B, b)
    except np.linalg.LinAlgError:
        return x_full
    if xb.min() < -FEAS_TOL:
        return x_full
    out = np.zeros_like(x_full)
    out[basis] = np.maximum(xb, 0.0)
    return out
