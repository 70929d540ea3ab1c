import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blockgraph.cod import cod_cluster, cod_distance, distance_matrix, tune_alpha
from blockgraph.errors import InvalidParameterError
from blockgraph.model_gen import cluster_gap, scenario_model
from blockgraph.partition import Partition


def brute_distance(S, j, jp):
    return max(abs(S[j, c] - S[jp, c]) for c in range(S.shape[0]) if c not in (j, jp))


def test_hand_example():
    S = np.array([[0, 1, 2], [1, 0, 4], [2, 4, 0]], dtype=float)
    assert cod_distance(S, 0, 1) == 2.0
    assert distance_matrix(S)[0, 1] == 2.0


def test_identical_rows_distance_zero():
    S = np.array([[1, 1, 3, 0], [1, 1, 3, 0], [3, 3, 5, 2], [0, 0, 2, 9]], dtype=float)
    assert cod_distance(S, 0, 1) == 0.0


def test_distance_requires_three_codes():
    with pytest.raises(InvalidParameterError):
        cod_distance(np.eye(2), 0, 1)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, (7, 7), elements=st.floats(-3, 3)))
def test_distance_matrix_matches_brute_force(S):
    D = distance_matrix(S)
    for j in range(7):
        for jp in range(7):
            if j != jp:
                assert D[j, jp] == brute_distance(S, j, jp)
                assert D[j, jp] == cod_distance(S, jp, j)


def test_large_alpha_single_cluster():
    S = np.random.default_rng(0).standard_normal((9, 9))
    D = distance_matrix(S)
    assert cod_cluster(S, D.max()).K == 1


def test_zero_alpha_singletons():
    S = np.random.default_rng(1).standard_normal((9, 9))
    S = S + S.T
    assert cod_cluster(S, 0.0) == Partition.singletons(9)


def test_tiny_inputs():
    assert cod_cluster(np.eye(1), 0.0).K == 1
    # no witness column for two codes, distance defined as 0
    assert cod_cluster(np.array([[1.0, 5.0], [5.0, 2.0]]), 0.0).K == 1


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (8, 8), elements=st.floats(-2, 2)), st.floats(0, 5))
def test_output_is_partition(S, alpha):
    part = cod_cluster(S, alpha)
    members = sorted(i for g in part.groups for i in g)
    assert members == list(range(8))


def test_lexicographic_tie_break():
    # all rows identical: every pair ties at 0, anchor pair is (0, 1)
    S = np.ones((5, 5))
    part = cod_cluster(S, 0.0)
    assert part.K == 1
    # two blocks with equal gaps: the block holding code 0 is emitted first
    S = np.kron(np.array([[1.0, 0.0], [0.0, 1.0]]), np.ones((3, 3)))
    part = cod_cluster(S, 0.5)
    assert part.groups == ((0, 1, 2), (3, 4, 5))


def noiseless(name, d, K, seed):
    model = scenario_model(name, d, K, np.random.default_rng(seed))
    return model, model.Sigma


def test_exact_recovery_g3():
    model, S = noiseless("G3", 20, 5, 0)
    gap = cluster_gap(S, model.assignment)
    assert cod_cluster(S, gap / 2) == model.assignment


@pytest.mark.parametrize("name", ["G1", "G2", "G3", "G4", "G5", "G6"])
def test_exact_recovery_over_alpha_range(name):
    for seed in range(5):
        model, S = noiseless(name, 24, 6, seed)
        gap = cluster_gap(S, model.assignment)
        for frac in (0.05, 0.25, 0.5):
            assert cod_cluster(S, frac * gap) == model.assignment


def test_tune_alpha_identical_partitions_picks_first():
    S = np.ones((6, 6))
    alpha, part, trace = tune_alpha(S, 6, 10, grid=[0.1, 0.2, 0.3])
    assert trace.chosen == 0 and trace.stability == [1.0, 1.0, 1.0]
    assert alpha == pytest.approx(0.1 * math.sqrt(math.log(6) / 10))


def test_tune_alpha_single_point():
    S = np.random.default_rng(0).standard_normal((5, 5))
    alpha, part, trace = tune_alpha(S, 5, 10, grid=[0.7])
    assert trace.stability == [1.0] and trace.chosen == 0
    assert part == trace.partitions[0]


def test_tune_alpha_rejects_bad_grid():
    with pytest.raises(InvalidParameterError):
        tune_alpha(np.eye(4), 4, 4, grid=[])
    with pytest.raises(InvalidParameterError):
        tune_alpha(np.eye(4), 4, 4, grid=[0.2, 0.1])


def test_tune_alpha_well_separated():
    model = scenario_model("G2", 20, 5, np.random.default_rng(3))
    rng = np.random.default_rng(4)
    noise = rng.uniform(-0.02, 0.02, (20, 20))
    S = model.Sigma + (noise + noise.T) / 2
    # grid starts above the noise-level distances
    grid = [c / 10 for c in range(5, 21)]
    _, part, _ = tune_alpha(S, 20, 10, grid)
    assert part == model.assignment
