"""Cluster-level covariance refinement, CLIME precision estimation and code-level reconstruction."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidParameterError, NumericalFailureError
from .lp import simplex
from .partition import Partition
from .pmi import SppmiMatrix, write_dense

DEFAULT_EPS_FLOOR = 1e-8
DEFAULT_GRID = tuple(round(0.1 * i, 1) for i in range(1, 21))


def refine_q(S: np.ndarray | SppmiMatrix, partition: Partition) -> np.ndarray:
    """Average the entries of ``S`` over cluster blocks.

    Off-diagonal blocks use the full block mean, diagonal blocks the mean of
    their off-diagonal entries, and singleton clusters their one diagonal entry.
    """
    S = _values(S)
    A = partition.matrix()
    sizes = partition.sizes.astype(float)
    block_sum = A.T @ S @ A
    diag_sum = A.T @ np.diag(S)
    Q = block_sum / np.outer(sizes, sizes)
    within = np.where(
        sizes > 1,
        (np.diag(block_sum) - diag_sum) / np.maximum(sizes * (sizes - 1), 1.0),
        diag_sum,
    )
    Q[np.diag_indices_from(Q)] = within
    return (Q + Q.T) / 2


def representative_q(S: np.ndarray | SppmiMatrix, partition: Partition) -> np.ndarray:
    """Baseline without averaging: the submatrix of ``S`` at the first code of each cluster."""
    S = _values(S)
    reps = [g[0] for g in partition.groups]
    return S[np.ix_(reps, reps)].copy()


def _values(S):
    return S.values if isinstance(S, SppmiMatrix) else np.asarray(S, dtype=float)


def clime_column(q_hat: np.ndarray, k: int, lam: float) -> tuple[np.ndarray, dict]:
    """Solve ``min ||b||_1`` s.t. ``||q_hat b - e_k||_inf <= lam``.

    Returns the minimizer and a diagnostics dict with the constraint residual,
    objective and pivot count.
    """
    if lam <= 0:
        raise InvalidParameterError("lambda must be positive")
    K = q_hat.shape[0]
    e = np.zeros(K)
    e[k] = 1.0
    A_ub = np.block([[q_hat, -q_hat], [-q_hat, q_hat]])
    b_ub = np.concatenate([lam + e, lam - e])
    try:
        res = simplex(np.ones(2 * K), A_ub, b_ub)
    except NumericalFailureError as exc:
        raise type(exc)(f"column {k}: {exc}", column=k) from exc
    beta = res.x[:K] - res.x[K:]
    residual = float(np.abs(q_hat @ beta - e).max())
    return beta, {
        "column": k,
        "status": "optimal",
        "residual": residual,
        "objective": float(np.abs(beta).sum()),
        "iterations": res.iterations,
    }


def symmetrize_min(B: np.ndarray) -> np.ndarray:
    """Keep, for each pair ``(i, j)``, whichever of ``B_ij`` and ``B_ji`` is smaller in magnitude."""
    a, at = np.abs(B), np.abs(B.T)
    # exact ties (possibly with opposite signs) resolve to the upper-triangle entry
    keep = (a < at) | ((a == at) & np.triu(np.ones(B.shape, dtype=bool)))
    return np.where(keep, B, B.T)


def clime(q_hat: np.ndarray, lam: float, workers: int = 1) -> tuple[np.ndarray, list[dict]]:
    q_hat = np.asarray(q_hat, dtype=float)
    K = q_hat.shape[0]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            cols = list(pool.map(lambda k: clime_column(q_hat, k, lam), range(K)))
    else:
        cols = [clime_column(q_hat, k, lam) for k in range(K)]
    B = np.column_stack([b for b, _ in cols]) if K else np.zeros((0, 0))
    return symmetrize_min(B), [diag for _, diag in cols]


def support(o_hat: np.ndarray, tau: float) -> np.ndarray:
    return np.abs(o_hat) > tau


def estimate_gamma(S, q_hat: np.ndarray, partition: Partition) -> np.ndarray:
    S = _values(S)
    labels = partition.labels
    raw = np.diag(S) - np.diag(q_hat)[labels]
    gamma = np.maximum(raw, 0.0)
    gamma[partition.sizes[labels] == 1] = 0.0
    return gamma


def estimate_omega(
    o_hat: np.ndarray,
    gamma_hat: np.ndarray,
    partition: Partition,
    eps_floor: float = DEFAULT_EPS_FLOOR,
) -> np.ndarray:
    """Code-level precision ``(A Q A^T + D)^{-1}`` written in Woodbury form.

    ``D`` is ``diag(gamma_hat)`` floored at ``eps_floor`` and ``Q = o_hat^{-1}``
    enters only through ``o_hat``.
    """
    if eps_floor <= 0:
        raise InvalidParameterError("eps_floor must be positive")
    A = partition.matrix()
    inv_d = 1.0 / np.maximum(np.asarray(gamma_hat, dtype=float), eps_floor)
    DA = inv_d[:, None] * A
    inner = o_hat + A.T @ DA
    try:
        middle = np.linalg.solve(inner, DA.T)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"inner K x K system is singular: {exc}") from exc
    if not np.all(np.isfinite(middle)):
        raise NumericalFailureError("inner K x K system is singular")
    omega = np.diag(inv_d) - DA @ middle
    return (omega + omega.T) / 2


@dataclass
class LambdaTrace:
    lambdas: list[float]
    changes: list[float]  # nan where undefined
    chosen: int


def tune_lambda(
    q_hat: np.ndarray, d: int, p: int, grid=DEFAULT_GRID, workers: int = 1
) -> tuple[float, np.ndarray, LambdaTrace, list[dict]]:
    """Pick ``lambda = c * sqrt(ln d / p)`` whose estimate moved least from the previous grid point.

    Returns ``(lambda, o_hat, trace, column_diagnostics)``.
    """
    grid = list(grid)
    if not grid:
        raise InvalidParameterError("lambda grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError("lambda grid must be sorted ascending")
    scale = math.sqrt(math.log(d) / p)
    lambdas = [c * scale for c in grid]
    fits = [clime(q_hat, lam, workers) for lam in lambdas]
    changes = [math.nan] + [
        float(np.abs(fits[i][0] - fits[i - 1][0]).max()) for i in range(1, len(fits))
    ]
    if len(fits) == 1:
        best = 0
    else:
        # strict < keeps the smaller c on ties
        best = 1
        for i in range(2, len(fits)):
            if changes[i] < changes[best]:
                best = i
    trace = LambdaTrace(lambdas, changes, best)
    return lambdas[best], fits[best][0], trace, fits[best][1]


@dataclass
class EstimationResult:
    partition: Partition
    q_hat: np.ndarray
    o_hat: np.ndarray
    support: np.ndarray
    gamma_hat: np.ndarray
    omega_hat: np.ndarray
    lam: float
    tau: float
    diagnostics: list[dict] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def save(self, directory) -> None:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        write_dense(self.q_hat, out / "q_hat.csv")
        write_dense(self.o_hat, out / "o_hat.csv")
        write_dense(self.support.astype(int), out / "support.csv")
        with open(out / "gamma.csv", "w") as fh:
            fh.write(f"{self.gamma_hat.size}\n")
            fh.writelines(f"{float(g)!r}\n" for g in self.gamma_hat)
        write_dense(self.omega_hat, out / "omega.csv")
        meta = {
            "lambda": self.lam,
            "tau": self.tau,
            "labels": [int(k) + 1 for k in self.partition.labels],
            "residuals": [c["residual"] for c in self.diagnostics],
            **self.meta,
        }
        with open(out / "meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")


def estimate(
    S,
    partition: Partition,
    d: int,
    p: int,
    lam: float | None = None,
    grid=DEFAULT_GRID,
    tau: float | None = None,
    eps_floor: float = DEFAULT_EPS_FLOOR,
    averaging: bool = True,
    workers: int = 1,
) -> EstimationResult:
    """Refine, fit CLIME (fixed or tuned lambda), threshold, and rebuild ``Gamma`` and ``Omega``.

    ``averaging=False`` swaps the block average for :func:`representative_q`.
    ``tau`` defaults to the selected lambda.
    """
    q_hat = refine_q(S, partition) if averaging else representative_q(S, partition)
    meta: dict = {"averaging": averaging}
    if lam is None:
        lam, o_hat, trace, diags = tune_lambda(q_hat, d, p, grid, workers)
        meta["lambda_trace"] = {
            "lambdas": trace.lambdas,
            "changes": [None if math.isnan(x) else x for x in trace.changes],
            "chosen": trace.chosen,
        }
    else:
        o_hat, diags = clime(q_hat, lam, workers)
    tau = lam if tau is None else tau
    gamma_hat = estimate_gamma(S, q_hat, partition)
    omega_hat = estimate_omega(o_hat, gamma_hat, partition, eps_floor)
    return EstimationResult(
        partition, q_hat, o_hat, support(o_hat, tau), gamma_hat, omega_hat, lam, tau, diags, meta
    )
