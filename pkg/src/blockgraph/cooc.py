"""Windowed co-occurrence counts over token sequences."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import IngestionError, InvalidParameterError, ParseError


@dataclass(frozen=True, eq=False)
class CoocMatrix:
    """Symmetric counts of ordered position pairs ``0 < |t - s| <= q``."""

    counts: sp.csr_matrix
    q: int

    @property
    def d(self) -> int:
        return self.counts.shape[0]

    @property
    def row_margins(self) -> np.ndarray:
        return np.asarray(self.counts.sum(axis=1)).ravel().astype(np.int64)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def dense(self) -> np.ndarray:
        return self.counts.toarray()


def count_cooccurrences(
    sequences: Sequence[np.ndarray], q: int, d: int | None = None
) -> CoocMatrix:
    """Count co-occurrences within ``q`` positions, never across sequence boundaries.

    ``sequences`` hold 0-based code ids in ``[0, d)``. When ``d`` is omitted
    it is the largest id seen plus one.
    """
    if q < 1:
        raise InvalidParameterError("window q must be >= 1")
    if d is None:
        d = max((int(np.max(s)) + 1 for s in sequences if len(s)), default=0)
    flat = np.zeros(d * d, dtype=np.int64)
    for n, seq in enumerate(sequences):
        seq = np.asarray(seq, dtype=np.int64)
        if seq.size == 0:
            continue
        bad = np.flatnonzero((seq < 0) | (seq >= d))
        if bad.size:
            pos = int(bad[0])
            raise IngestionError(
                f"code id {int(seq[pos]) + 1} out of range 1..{d} at position {pos + 1}",
                line=n + 1,
            )
        for u in range(1, min(q, seq.size - 1) + 1):
            flat += np.bincount(seq[:-u] * d + seq[u:], minlength=d * d)
    one_way = flat.reshape(d, d)
    counts = one_way + one_way.T
    return CoocMatrix(sp.csr_matrix(counts), q)


def write_cooc(C: CoocMatrix, path) -> None:
    """Header ``d q total`` then ``i j count`` for nonzero upper-triangle entries (1-based)."""
    upper = sp.triu(C.counts).tocoo()
    order = np.lexsort((upper.col, upper.row))
    with open(path, "w") as fh:
        fh.write(f"{C.d} {C.q} {C.total}\n")
        for i, j, v in zip(upper.row[order], upper.col[order], upper.data[order]):
            if v:
                fh.write(f"{i + 1} {j + 1} {int(v)}\n")


def read_cooc(path) -> CoocMatrix:
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ParseError("header must be 'd q total'", path, 1)
        try:
            d, q, total = (int(x) for x in header)
        except ValueError:
            raise ParseError("header must hold three integers", path, 1) from None
        if d < 1 or q < 1 or total < 0:
            raise ParseError("header values out of range", path, 1)
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3:
                raise ParseError("expected 'i j count'", path, lineno)
            try:
                i, j, v = (int(x) for x in parts)
            except ValueError:
                raise ParseError("non-integer field", path, lineno) from None
            if not (1 <= i <= d and 1 <= j <= d):
                raise ParseError(f"index out of range 1..{d}", path, lineno)
            if i > j:
                raise ParseError("entries must satisfy i <= j", path, lineno)
            if v < 0:
                raise ParseError("negative count", path, lineno)
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(v)
    upper = sp.coo_matrix((vals, (rows, cols)), shape=(d, d), dtype=np.int64).tocsr()
    diag = sp.diags(upper.diagonal())
    counts = (upper + upper.T - diag).tocsr().astype(np.int64)
    C = CoocMatrix(counts, q)
    if C.total != total:
        raise ParseError(f"header total {total} disagrees with entries ({C.total})", path, 1)
    return C
