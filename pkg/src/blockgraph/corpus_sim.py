"""Token corpora from a slowly drifting discourse vector.

The latent state follows ``z_{t+1} = sqrt(alpha) z_t + sqrt(1 - alpha) r_{t+1}``
with ``r ~ N(0, I_p / p)``, started from its stationary law ``N(0, I_p / p)``.
At time ``t`` the discourse direction is ``c_t = z_t / ||z_t||`` and code ``j``
is emitted with probability proportional to ``exp(<V_j, c_t>)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.signal import lfilter

from .errors import InvalidParameterError, ParseError

CHUNK = 16384
_TINY = 1e-300


@dataclass(frozen=True)
class DiscourseState:
    z: np.ndarray
    c: np.ndarray
    alpha: float


def default_alpha(d: int, p: int) -> float:
    """``1 - ln(d) / p**2``."""
    alpha = 1.0 - math.log(d) / p**2
    if not 0.0 < alpha < 1.0:
        raise InvalidParameterError(f"alpha = {alpha} outside (0, 1) for d={d}, p={p}")
    return alpha


def _normalize(z):
    return z / np.linalg.norm(z)


def init_discourse(p: int, rng: np.random.Generator, alpha: float = 1.0) -> DiscourseState:
    if p < 1:
        raise InvalidParameterError("p must be >= 1")
    while True:
        z = rng.standard_normal(p) / math.sqrt(p)
        if np.linalg.norm(z) >= _TINY:
            return DiscourseState(z, _normalize(z), alpha)


def step_discourse(state: DiscourseState, rng: np.random.Generator) -> DiscourseState:
    p = state.z.size
    r = rng.standard_normal(p) / math.sqrt(p)
    z = math.sqrt(state.alpha) * state.z + math.sqrt(1.0 - state.alpha) * r
    return DiscourseState(z, _normalize(z), state.alpha)


def emission_probs(V: np.ndarray, c: np.ndarray) -> np.ndarray:
    logits = V @ c
    w = np.exp(logits - logits.max())
    return w / w.sum()


def discourse_path(
    p: int, T: int, alpha: float, rng: np.random.Generator, z0: np.ndarray | None = None
) -> Iterable[np.ndarray]:
    """Yield the unit discourse vectors ``c_1..c_T`` in blocks of at most ``CHUNK`` rows.

    Consumes ``rng`` exactly like ``init_discourse`` followed by ``T - 1``
    calls to ``step_discourse``.
    """
    if T <= 0:
        return
    a, b = math.sqrt(alpha), math.sqrt(1.0 - alpha)
    if z0 is None:
        z0 = init_discourse(p, rng).z
    prev = np.asarray(z0, dtype=float)
    first = True
    remaining = T
    while remaining > 0:
        n = min(CHUNK, remaining)
        if first:
            n_new = n - 1
            r = rng.standard_normal((n_new, p)) / math.sqrt(p)
            z_new = lfilter([b], [1.0, -a], r, axis=0, zi=(a * prev)[None, :])[0] if n_new else r
            z = np.vstack([prev[None, :], z_new])
            first = False
        else:
            r = rng.standard_normal((n, p)) / math.sqrt(p)
            z = lfilter([b], [1.0, -a], r, axis=0, zi=(a * prev)[None, :])[0]
        prev = z[-1]
        remaining -= n
        yield z / np.linalg.norm(z, axis=1, keepdims=True)


def simulate_corpus(
    V: np.ndarray, T: int, alpha: float, rng: np.random.Generator
) -> np.ndarray:
    """Length-``T`` array of 0-based code ids.

    The discourse walk and the emission draws use two child streams spawned
    from ``rng``, so the walk itself does not depend on ``d``.
    """
    if T < 0:
        raise InvalidParameterError("T must be >= 0")
    d, p = V.shape
    walk_rng, emit_rng = rng.spawn(2)
    out = np.empty(T, dtype=np.int64)
    pos = 0
    for C in discourse_path(p, T, alpha, walk_rng):
        probs = _block_probs(V, C)
        cdf = np.cumsum(probs, axis=1)
        u = emit_rng.random(C.shape[0]) * cdf[:, -1]
        tok = (cdf < u[:, None]).sum(axis=1)
        out[pos:pos + tok.size] = np.minimum(tok, d - 1)
        pos += tok.size
    return out


def _block_probs(V, C):
    logits = C @ V.T
    logits -= logits.max(axis=1, keepdims=True)
    np.exp(logits, out=logits)
    logits /= logits.sum(axis=1, keepdims=True)
    return logits


def write_sequences(sequences: Iterable[np.ndarray], path) -> None:
    """One sequence per line, whitespace-separated 1-based ids."""
    with open(path, "w") as fh:
        for seq in sequences:
            fh.write(" ".join(str(int(t) + 1) for t in seq))
            fh.write("\n")


def read_sequences(path, d: int | None = None) -> list[np.ndarray]:
    """Inverse of :func:`write_sequences`; returns 0-based arrays."""
    seqs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            try:
                ids = np.array([int(x) for x in parts], dtype=np.int64)
            except ValueError:
                raise ParseError("non-integer token", path, lineno) from None
            if ids.size and ids.min() < 1:
                raise ParseError("token ids are 1-based", path, lineno)
            if d is not None and ids.size and ids.max() > d:
                raise ParseError(f"token id {ids.max()} exceeds d={d}", path, lineno)
            seqs.append(ids - 1)
    return seqs
