"""Recovery metrics: Rand index, relative matrix error, support F-score."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InvalidParameterError
from .partition import Partition


@dataclass(frozen=True)
class MetricReport:
    rand_index: float
    rel_err_max: float
    rel_err_frobenius: float
    precision: float
    recall: float
    f_score: float

    def as_dict(self) -> dict:
        return asdict(self)


def _pair_agreement(a: np.ndarray, b: np.ndarray) -> int:
    """Number of unordered pairs on which the two labelings agree about same-vs-different cluster."""
    d = a.size
    n_pairs = d * (d - 1) // 2

    def same_pairs(counts):
        counts = counts.astype(np.int64)
        return int((counts * (counts - 1) // 2).sum())

    _, ia = np.unique(a, return_inverse=True)
    _, ib = np.unique(b, return_inverse=True)
    table = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(table, (ia, ib), 1)
    both_same = same_pairs(table.ravel())
    same_a = same_pairs(table.sum(axis=1))
    same_b = same_pairs(table.sum(axis=0))
    both_diff = n_pairs - same_a - same_b + both_same
    return both_same + both_diff


def rand_index(G: Partition, G_hat: Partition) -> float:
    if G.d != G_hat.d:
        raise InvalidParameterError(f"partitions cover different d ({G.d} vs {G_hat.d})")
    d = G.d
    if d < 2:
        return 1.0
    return _pair_agreement(G.labels, G_hat.labels) / (d * (d - 1) / 2)


def relative_error(M_hat: np.ndarray, M: np.ndarray, norm: str = "max") -> float:
    M_hat = np.asarray(M_hat, dtype=float)
    M = np.asarray(M, dtype=float)
    if M_hat.shape != M.shape:
        raise InvalidParameterError("shape mismatch")
    if norm == "max":
        f = lambda X: float(np.abs(X).max()) if X.size else 0.0
    elif norm in ("frobenius", "fro"):
        f = lambda X: float(np.linalg.norm(X))
    else:
        raise InvalidParameterError(f"unknown norm {norm!r}")
    ref = f(M)
    if ref == 0:
        raise InvalidParameterError("reference matrix has zero norm")
    return f(M_hat - M) / ref


def f_score(support_hat: np.ndarray, support_true: np.ndarray) -> tuple[float, float, float]:
    """Precision, recall and F over strictly-upper-triangular entries."""
    S_hat = np.asarray(support_hat, dtype=bool)
    S = np.asarray(support_true, dtype=bool)
    if S_hat.shape != S.shape or S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise InvalidParameterError("supports must be square and of equal shape")
    if (S_hat != S_hat.T).any() or (S != S.T).any():
        raise InvalidParameterError("supports must be symmetric")
    iu = np.triu_indices(S.shape[0], k=1)
    pred, true = S_hat[iu], S[iu]
    tp = int((pred & true).sum())
    fp = int((pred & ~true).sum())
    fn = int((~pred & true).sum())
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f
