"""Empirical PMI and its shifted, floored variant (the initial covariance estimate)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .cooc import CoocMatrix
from .errors import EmptyCorpusError, InvalidParameterError, ParseError

DEFAULT_ETA = -5.0

# Zero co-occurrence has log-ratio -inf; kept as the IEEE value and removed by sppmi().
NEG_INF = -np.inf


@dataclass(frozen=True, eq=False)
class SppmiMatrix:
    values: np.ndarray
    eta: float

    @property
    def d(self) -> int:
        return self.values.shape[0]


def empirical_pmi(C: CoocMatrix) -> np.ndarray:
    """``ln(total * C(j, j') / (C(j, .) C(j', .)))`` with ``-inf`` where ``C(j, j') = 0``."""
    total = C.total
    if total == 0:
        raise EmptyCorpusError("co-occurrence matrix is empty")
    counts = C.dense().astype(float)
    margins = C.row_margins.astype(float)
    out = np.full(counts.shape, NEG_INF)
    nz = counts > 0
    rows, cols = np.nonzero(nz)
    out[nz] = (
        np.log(float(total)) + np.log(counts[nz]) - np.log(margins[rows]) - np.log(margins[cols])
    )
    return out


def sppmi(pmi: np.ndarray, eta: float = DEFAULT_ETA) -> SppmiMatrix:
    if not np.isfinite(eta):
        raise InvalidParameterError("eta must be finite")
    values = np.maximum(pmi, eta)
    values = (values + values.T) / 2
    return SppmiMatrix(values, float(eta))


def write_dense(M: np.ndarray, path) -> None:
    """First line holds ``d``; then ``d`` comma-separated rows."""
    M = np.asarray(M)
    with open(path, "w") as fh:
        fh.write(f"{M.shape[0]}\n")
        for row in M:
            fh.write(",".join(repr(float(x)) for x in row))
            fh.write("\n")


def read_dense(path) -> np.ndarray:
    path = Path(path)
    with open(path) as fh:
        first = fh.readline().strip()
        try:
            d = int(first)
        except ValueError:
            raise ParseError("first line must be the dimension d", path, 1) from None
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                row = [float(x) for x in line.split(",")]
            except ValueError:
                raise ParseError("non-numeric entry", path, lineno) from None
            if len(row) != d:
                raise ParseError(f"expected {d} columns, got {len(row)}", path, lineno)
            rows.append(row)
    if len(rows) != d:
        raise ParseError(f"expected {d} rows, got {len(rows)}", path)
    return np.array(rows, dtype=float).reshape(d, d)
