"""Clustering codes by peeling groups of rows that no third column tells apart."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .metrics import rand_index
from .partition import Partition
from .pmi import SppmiMatrix

DEFAULT_GRID = tuple(round(0.1 * i, 1) for i in range(1, 21))
_BLOCK_ELEMS = 4_000_000


def _values(S):
    return S.values if isinstance(S, SppmiMatrix) else np.asarray(S, dtype=float)


def cod_distance(S, j: int, jp: int) -> float:
    """``max_{c != j, j'} |S[j, c] - S[j', c]|``."""
    S = _values(S)
    d = S.shape[0]
    if d < 3:
        raise InvalidParameterError("row distance needs d >= 3")
    if j == jp:
        raise InvalidParameterError("row distance needs two distinct codes")
    mask = np.ones(d, dtype=bool)
    mask[[j, jp]] = False
    return float(np.abs(S[j, mask] - S[jp, mask]).max())


def distance_matrix(S) -> np.ndarray:
    """All pairwise row distances; zero on the diagonal.

    For ``d < 3`` no witness column exists and every distance is 0.
    """
    S = _values(S)
    d = S.shape[0]
    D = np.zeros((d, d))
    if d < 3:
        return D
    idx = np.arange(d)
    block = max(1, _BLOCK_ELEMS // (d * d))
    for start in range(0, d, block):
        rows = idx[start:start + block]
        diff = np.abs(S[rows][:, None, :] - S[None, :, :])
        # drop the two excluded columns c = j and c = j'
        diff[np.arange(rows.size), :, rows] = 0.0
        diff[:, idx, idx] = 0.0
        D[rows] = diff.max(axis=2)
    D = np.maximum(D, D.T)
    np.fill_diagonal(D, 0.0)
    return D


def cod_cluster(S, alpha: float, D: np.ndarray | None = None) -> Partition:
    """Greedy peeling: anchor on the closest remaining pair, emit every code within ``alpha`` of either anchor.

    Ties for the closest pair go to the lexicographically smallest ``(j, j')``.
    Groups are numbered in the order they are emitted.
    """
    if alpha < 0:
        raise InvalidParameterError("alpha must be nonnegative")
    if D is None:
        D = distance_matrix(S)
    d = D.shape[0]
    remaining = np.arange(d)
    groups = []
    while remaining.size:
        if remaining.size == 1:
            groups.append(remaining.tolist())
            break
        sub = D[np.ix_(remaining, remaining)]
        iu = np.triu_indices(remaining.size, k=1)
        flat = np.argmin(sub[iu])
        a, b = iu[0][flat], iu[1][flat]
        if sub[a, b] > alpha:
            members = np.array([a])
        else:
            members = np.flatnonzero(np.minimum(sub[a], sub[b]) <= alpha)
        groups.append(remaining[members].tolist())
        keep = np.ones(remaining.size, dtype=bool)
        keep[members] = False
        remaining = remaining[keep]
    return Partition.from_groups(groups, d)


@dataclass
class AlphaTrace:
    alphas: list[float]
    partitions: list[Partition]
    stability: list[float]
    chosen: int


def tune_alpha(S, d: int, p: int, grid=DEFAULT_GRID) -> tuple[float, Partition, AlphaTrace]:
    """Choose ``alpha = c * sqrt(ln d / p)`` with the most stable partition.

    Stability of grid point ``i`` is the Rand index between its partition and
    the next one (the last point is compared with its predecessor). Ties go
    to the smaller ``c``.
    """
    grid = list(grid)
    if not grid:
        raise InvalidParameterError("alpha grid is empty")
    if any(b < a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError("alpha grid must be sorted ascending")
    scale = math.sqrt(math.log(d) / p)
    alphas = [c * scale for c in grid]
    D = distance_matrix(S)
    parts = [cod_cluster(S, a, D) for a in alphas]
    n = len(parts)
    if n == 1:
        stability = [1.0]
    else:
        stability = [rand_index(parts[i], parts[i + 1 if i + 1 < n else i - 1]) for i in range(n)]
    best = int(np.argmax(stability))  # first maximum = smallest c
    return alphas[best], parts[best], AlphaTrace(alphas, parts, stability, best)
