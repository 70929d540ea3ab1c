"""Ground-truth block graphical models for simulation.

A model couples a cluster-level precision matrix ``O`` (K x K) with an
assignment of ``d`` codes to ``K`` clusters and a diagonal noise ``gamma``.
The code-level covariance is ``Sigma = A Q A^T + diag(gamma)`` with
``Q = O^{-1}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidParameterError, SingularMatrixError
from .partition import Partition

EIG_TOL = 1e-10
MAX_CONDITION = 1e12


@dataclass(frozen=True, eq=False)
class PrecisionGraph:
    O: np.ndarray

    @property
    def K(self) -> int:
        return self.O.shape[0]

    def adjacency(self) -> np.ndarray:
        """Boolean off-diagonal support of ``O``."""
        adj = self.O != 0
        np.fill_diagonal(adj, False)
        return adj


@dataclass(frozen=True, eq=False)
class BlockModel:
    graph: PrecisionGraph
    assignment: Partition
    Q: np.ndarray
    gamma: np.ndarray
    Sigma: np.ndarray
    seed: int | None = None

    @property
    def d(self) -> int:
        return self.assignment.d

    @property
    def K(self) -> int:
        return self.graph.K

    @property
    def O(self) -> np.ndarray:
        return self.graph.O

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "d": self.d,
            "labels": [int(k) + 1 for k in self.assignment.labels],
            "O": [float(x) for x in self.O.ravel()],
            "gamma": [float(g) for g in self.gamma],
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BlockModel":
        K, d = int(doc["K"]), int(doc["d"])
        O = np.asarray(doc["O"], dtype=float).reshape(K, K)
        labels = np.asarray(doc["labels"], dtype=np.int64) - 1
        if labels.size != d:
            raise InvalidParameterError("labels length does not match d")
        gamma = np.asarray(doc["gamma"], dtype=float)
        return assemble_block_model(PrecisionGraph(O), Partition(labels), gamma, doc.get("seed"))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BlockModel":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def gen_independent_graph(K: int, c: float) -> PrecisionGraph:
    if K < 1 or c <= 0:
        raise InvalidParameterError(f"need K >= 1 and c > 0, got K={K}, c={c}")
    return PrecisionGraph(c * np.eye(K))


def gen_erdos_renyi_graph(
    K: int, prob: float, c: float, c1: float, rng: np.random.Generator
) -> PrecisionGraph:
    """Erdős–Rényi precision graph shifted to be positive definite.

    ``O = c * Adj + (|lambda_min(c * Adj)| + c1) * I`` so the smallest
    eigenvalue of ``O`` is ``c1``.
    """
    if K < 1:
        raise InvalidParameterError("K must be >= 1")
    if not 0.0 <= prob <= 1.0:
        raise InvalidParameterError("prob must lie in [0, 1]")
    if c <= 0 or c1 <= 0:
        raise InvalidParameterError("c and c1 must be positive")
    iu = np.triu_indices(K, k=1)
    adj = np.zeros((K, K))
    adj[iu] = rng.random(iu[0].size) < prob
    adj = adj + adj.T
    cadj = c * adj
    lam_min = scipy.linalg.eigvalsh(cadj)[0] if K > 1 else 0.0
    if abs(lam_min) < EIG_TOL:
        lam_min = 0.0
    O = cadj + (abs(lam_min) + c1) * np.eye(K)
    return PrecisionGraph(O)


def build_assignment(d: int, K: int, uneven: bool = False) -> Partition:
    """Contiguous even split: code ``i`` (1-based) goes to cluster ``ceil(i/m)``, ``m = d/K``.

    Uneven splits are rejected unless ``uneven=True``, in which case the same
    ceiling rule is applied with fractional ``m`` (sizes differ by at most one).
    """
    if d < 1 or K < 1 or K > d:
        raise InvalidParameterError(f"need 1 <= K <= d, got d={d}, K={K}")
    if d % K and not uneven:
        raise InvalidParameterError(f"K={K} does not divide d={d}")
    i = np.arange(1, d + 1)
    # ceil(i*K/d) in exact integer arithmetic
    labels = -((-i * K) // d) - 1
    return Partition(labels)


def assemble_block_model(
    graph: PrecisionGraph, assignment: Partition, gamma: np.ndarray, seed=None
) -> BlockModel:
    O = graph.O
    if assignment.K != graph.K:
        raise InvalidParameterError("assignment and graph disagree on K")
    if np.linalg.cond(O) > MAX_CONDITION:
        raise SingularMatrixError("precision matrix is numerically singular")
    try:
        Q = scipy.linalg.cho_solve(scipy.linalg.cho_factor(O), np.eye(graph.K))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"precision matrix is not positive definite: {exc}") from exc
    Q = (Q + Q.T) / 2
    gamma = np.asarray(gamma, dtype=float)
    labels = assignment.labels
    Sigma = Q[np.ix_(labels, labels)] + np.diag(gamma)
    return BlockModel(graph, assignment, Q, gamma, Sigma, seed)


def build_block_model(
    graph: PrecisionGraph,
    assignment: Partition,
    gamma_low: float,
    gamma_high: float,
    rng: np.random.Generator,
    seed=None,
) -> BlockModel:
    if not 0 <= gamma_low <= gamma_high:
        raise InvalidParameterError("need 0 <= gamma_low <= gamma_high")
    gamma = rng.uniform(gamma_low, gamma_high, size=assignment.d)
    singleton = assignment.sizes[assignment.labels] == 1
    gamma[singleton] = 0.0
    return assemble_block_model(graph, assignment, gamma, seed)


def woodbury_precision(A: np.ndarray, O: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """``(A O^{-1} A^T + diag(gamma))^{-1}`` via the Woodbury identity.

    All of ``gamma`` must be positive.
    """
    inv_g = 1.0 / np.asarray(gamma, dtype=float)
    GA = inv_g[:, None] * A
    inner = O + A.T @ GA
    middle = np.linalg.solve(inner, GA.T)
    out = np.diag(inv_g) - GA @ middle
    return (out + out.T) / 2


def cluster_gap(Sigma: np.ndarray, partition: Partition) -> float:
    """Minimum over cross-cluster pairs of the largest witnessed row difference."""
    labels = partition.labels
    d = Sigma.shape[0]
    best = np.inf
    for i in range(d):
        diff = np.abs(Sigma[i][None, :] - Sigma)
        diff[:, i] = 0.0
        diff[np.arange(d), np.arange(d)] = 0.0
        row_max = diff.max(axis=1)
        cross = labels != labels[i]
        if cross.any():
            best = min(best, row_max[cross].min())
    return float(best) if np.isfinite(best) else 0.0


def sample_embeddings(model: BlockModel, p: int, rng: np.random.Generator) -> np.ndarray:
    """d x p embedding matrix whose columns are ``A Z + E`` with ``Z ~ N(0, Q)``, ``E ~ N(0, diag(gamma))``."""
    if p < 1:
        raise InvalidParameterError("p must be >= 1")
    L = np.linalg.cholesky(model.Q)
    Z = L @ rng.standard_normal((model.K, p))
    E = np.sqrt(model.gamma)[:, None] * rng.standard_normal((model.d, p))
    return Z[model.assignment.labels] + E


# (graph family, prob, c, c1); independent graphs ignore prob and c1
SCENARIOS = {
    "G1": ("independent", None, 0.5, None),
    "G2": ("independent", None, 2.0, None),
    "G3": ("erdos_renyi", 0.2, 0.3, 0.2),
    "G4": ("erdos_renyi", 0.2, 0.5, 0.3),
    "G5": ("erdos_renyi", 0.05, 0.3, 0.2),
    "G6": ("erdos_renyi", 0.05, 0.5, 0.3),
}


def scenario_graph(name: str, K: int, rng: np.random.Generator) -> PrecisionGraph:
    try:
        family, prob, c, c1 = SCENARIOS[name]
    except KeyError:
        raise InvalidParameterError(f"unknown scenario {name!r}") from None
    if family == "independent":
        return gen_independent_graph(K, c)
    return gen_erdos_renyi_graph(K, prob, c, c1, rng)


def scenario_model(
    name: str,
    d: int,
    K: int,
    rng: np.random.Generator,
    gamma_low: float = 0.25,
    gamma_high: float = 0.5,
    uneven: bool = False,
    seed=None,
) -> BlockModel:
    graph = scenario_graph(name, K, rng)
    assignment = build_assignment(d, K, uneven=uneven)
    return build_block_model(graph, assignment, gamma_low, gamma_high, rng, seed=seed)
