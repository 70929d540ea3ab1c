"""Partitions of the code set ``{0, ..., d-1}`` into clusters."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidParameterError, ParseError


@dataclass(frozen=True, eq=False)
class Partition:
    """Disjoint cover of ``range(d)``.

    ``labels[i]`` is the 0-based cluster id of code ``i``. Cluster ids are
    always contiguous ``0..K-1``; the constructor relabels by first
    appearance in ``groups`` order when built from groups.
    """

    labels: np.ndarray
    _groups: tuple = field(default=None, repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.ndim != 1:
            raise InvalidParameterError("labels must be one-dimensional")
        if labels.size and labels.min() < 0:
            raise InvalidParameterError("labels must be nonnegative")
        if labels.size:
            present = np.unique(labels)
            if present.size != labels.max() + 1:
                raise InvalidParameterError(
                    "cluster ids must be contiguous 0..K-1 with every id used"
                )
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        if self._groups is None:
            K = int(labels.max()) + 1 if labels.size else 0
            groups = tuple(tuple(int(i) for i in np.flatnonzero(labels == k)) for k in range(K))
            object.__setattr__(self, "_groups", groups)

    @classmethod
    def from_groups(cls, groups: Iterable[Iterable[int]], d: int | None = None) -> "Partition":
        groups = [sorted(int(i) for i in g) for g in groups]
        if any(len(g) == 0 for g in groups):
            raise InvalidParameterError("groups must be nonempty")
        members = [i for g in groups for i in g]
        if d is None:
            d = len(members)
        if sorted(members) != list(range(d)):
            raise InvalidParameterError("groups must be disjoint and cover 0..d-1")
        labels = np.empty(d, dtype=np.int64)
        for k, g in enumerate(groups):
            labels[g] = k
        return cls(labels, tuple(tuple(g) for g in groups))

    @classmethod
    def singletons(cls, d: int) -> "Partition":
        return cls(np.arange(d))

    @property
    def d(self) -> int:
        return int(self.labels.size)

    @property
    def K(self) -> int:
        return len(self._groups)

    @property
    def groups(self) -> tuple:
        return self._groups

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    def matrix(self) -> np.ndarray:
        """Assignment matrix ``A`` (d x K) with ``A[i, k] = 1`` iff ``i`` is in cluster ``k``."""
        A = np.zeros((self.d, self.K))
        A[np.arange(self.d), self.labels] = 1.0
        return A

    def canonical(self) -> "Partition":
        """Same partition with clusters numbered by their smallest member."""
        return Partition.from_groups(sorted(self._groups, key=min), self.d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.d == other.d and set(self._groups) == set(other._groups)

    def __hash__(self):
        return hash(frozenset(self._groups))

    def __repr__(self):
        return f"Partition(d={self.d}, K={self.K})"


def write_partition(partition: Partition, path) -> None:
    """Write ``code_id,cluster_id`` rows, both 1-based."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["code_id", "cluster_id"])
        for i, k in enumerate(partition.labels):
            writer.writerow([i + 1, int(k) + 1])


def read_partition(path) -> Partition:
    path = Path(path)
    rows: list[tuple[int, int]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["code_id", "cluster_id"]:
            raise ParseError("expected header 'code_id,cluster_id'", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                code, cluster = (int(x) for x in row)
            except ValueError:
                raise ParseError(f"bad row {row!r}", path, lineno) from None
            if code < 1 or cluster < 1:
                raise ParseError("ids are 1-based", path, lineno)
            rows.append((code, cluster))
    d = len(rows)
    codes = sorted(c for c, _ in rows)
    if codes != list(range(1, d + 1)):
        raise ParseError("code ids must be exactly 1..d, each once", path)
    raw = np.empty(d, dtype=np.int64)
    for code, cluster in rows:
        raw[code - 1] = cluster
    # clusters may be numbered arbitrarily in the file
    _, labels = np.unique(raw, return_inverse=True)
    return Partition(labels)


def labels_from_sequence(labels: Sequence[int]) -> Partition:
    """Build a partition from arbitrary hashable cluster tags."""
    _, inv = np.unique(np.asarray(labels), return_inverse=True)
    return Partition(inv)
