"""Independent reference solvers used only by the tests."""

import functools
import itertools

import numpy as np
from scipy.optimize import linprog


def clime_lp_arrays(Q, k, lam):
    K = Q.shape[0]
    e = np.zeros(K)
    e[k] = 1.0
    A = np.block([[Q, -Q], [-Q, Q]])
    b = np.concatenate([lam + e, lam - e])
    return A, b


def vertex_enumeration_objective(Q, k, lam):
    """Optimal CLIME objective by checking every basic solution of the split LP.

    Feasible only for K <= 4: the split problem has 2K variables and 4K
    inequalities (2K rows plus nonnegativity), so there are C(4K, 2K) candidate
    active sets.
    """
    A, b = clime_lp_arrays(Q, k, lam)
    n = A.shape[1]
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = np.inf
    for active in itertools.combinations(range(G.shape[0]), n):
        sub = G[list(active)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, h[list(active)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, x.sum())
    return best


def arrangement_objective(Q, k, lam):
    """Optimal CLIME objective by brute force over the hyperplane arrangement.

    min ||beta||_1 subject to |Q beta - e_k| <= lam is convex and piecewise
    linear on a bounded polytope, so the minimum sits at a point where K
    independent hyperplanes meet, each being a row face Q_i beta = e_ki +/- lam
    or a coordinate plane beta_j = 0. Every such point is solved for and the
    best feasible one is kept. About 9000 candidates per column at K = 6.
    """
    K = Q.shape[0]
    e = np.zeros(K)
    e[k] = 1.0
    pick, sign, is_row = _arrangement(K)
    # candidate system rows: [Q; I] indexed by pick, with matching right-hand sides
    H = np.vstack([Q, np.eye(K)])[pick]
    r = np.where(is_row, np.concatenate([e, np.zeros(K)])[pick] + lam * sign, 0.0)
    ok = np.abs(np.linalg.det(H)) > 1e-12
    beta = np.linalg.solve(H[ok], r[ok][..., None])[..., 0]
    feasible = np.all(np.abs(beta @ Q.T - e) <= lam + 1e-9, axis=1)
    return np.abs(beta[feasible]).sum(axis=1).min()


@functools.lru_cache(maxsize=None)
def _arrangement(K):
    picks, signs = [], []
    for j in range(K + 1):
        for rows in itertools.combinations(range(K), j):
            for zeros in itertools.combinations(range(K), K - j):
                for sg in itertools.product((-1.0, 1.0), repeat=j):
                    picks.append(list(rows) + [K + z for z in zeros])
                    signs.append(list(sg) + [0.0] * (K - j))
    pick = np.array(picks)
    return pick, np.array(signs), pick < K


def highs_objective(Q, k, lam):
    A, b = clime_lp_arrays(Q, k, lam)
    res = linprog(np.ones(A.shape[1]), A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return res.fun


def random_pd(K, rng, cond_floor=0.2):
    X = rng.standard_normal((K, K))
    M = X @ X.T / K + cond_floor * np.eye(K)
    return (M + M.T) / 2


def brute_rand_index(a, b):
    d = len(a)
    agree = 0
    for i in range(d):
        for j in range(i + 1, d):
            agree += (a[i] == a[j]) == (b[i] == b[j])
    return agree / (d * (d - 1) / 2)
