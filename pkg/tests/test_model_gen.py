import json

import numpy as np
import pytest

from blockgraph.errors import InvalidParameterError, SingularMatrixError
from blockgraph.model_gen import (
    BlockModel,
    PrecisionGraph,
    build_assignment,
    build_block_model,
    cluster_gap,
    gen_erdos_renyi_graph,
    gen_independent_graph,
    sample_embeddings,
    scenario_model,
    woodbury_precision,
)


def test_independent_graph_values():
    np.testing.assert_array_equal(gen_independent_graph(2, 0.5).O, [[0.5, 0], [0, 0.5]])
    np.testing.assert_array_equal(gen_independent_graph(1, 2.0).O, [[2.0]])
    eig = np.linalg.eigvalsh(gen_independent_graph(7, 1.3).O)
    np.testing.assert_allclose(eig, 1.3)


@pytest.mark.parametrize("K,c", [(0, 1.0), (3, 0.0), (3, -1.0)])
def test_independent_graph_rejects(K, c):
    with pytest.raises(InvalidParameterError):
        gen_independent_graph(K, c)


def test_erdos_renyi_empty_graph():
    O = gen_erdos_renyi_graph(5, 0.0, 0.3, 0.2, np.random.default_rng(0)).O
    np.testing.assert_array_equal(O, 0.2 * np.eye(5))


def test_erdos_renyi_complete_pair():
    # adjacency [[0,1],[1,0]] scaled by 0.3 has eigenvalues -0.3, 0.3
    O = gen_erdos_renyi_graph(2, 1.0, 0.3, 0.2, np.random.default_rng(0)).O
    np.testing.assert_allclose(O, [[0.5, 0.3], [0.3, 0.5]])
    np.testing.assert_allclose(np.linalg.eigvalsh(O), [0.2, 0.8])


def test_erdos_renyi_mean_edge_count():
    rng = np.random.default_rng(1)
    n = 10_000
    counts = np.array([
        np.triu(gen_erdos_renyi_graph(10, 0.2, 0.3, 0.2, rng).O, 1).astype(bool).sum()
        for _ in range(n)
    ])
    # expected K(K-1)prob/2 = 9, binomial(45, 0.2) sd = sqrt(45*0.2*0.8)
    se = np.sqrt(45 * 0.2 * 0.8 / n)
    assert abs(counts.mean() - 9.0) < 3 * se


@pytest.mark.parametrize("seed", range(20))
def test_erdos_renyi_min_eigenvalue(seed):
    rng = np.random.default_rng(seed)
    O = gen_erdos_renyi_graph(15, 0.3, 0.5, 0.3, rng).O
    assert np.array_equal(O, O.T)
    assert np.linalg.eigvalsh(O)[0] >= 0.3 - 1e-10


def test_build_assignment():
    assert build_assignment(4, 2).labels.tolist() == [0, 0, 1, 1]
    assert build_assignment(6, 3).labels.tolist() == [0, 0, 1, 1, 2, 2]
    assert build_assignment(5, 5).labels.tolist() == list(range(5))
    with pytest.raises(InvalidParameterError):
        build_assignment(25, 10)


def test_build_assignment_uneven_uses_ceiling_rule():
    part = build_assignment(25, 10, uneven=True)
    m = 2.5
    expected = [int(np.ceil(i / m)) - 1 for i in range(1, 26)]
    assert part.labels.tolist() == expected
    assert part.K == 10
    assert sorted(set(part.sizes.tolist())) == [2, 3]


def test_block_model_scalar():
    model = build_block_model(PrecisionGraph(np.array([[2.0]])), build_assignment(1, 1), 0.25, 0.5,
                              np.random.default_rng(0))
    assert model.gamma.tolist() == [0.0]
    np.testing.assert_allclose(model.Sigma, [[0.5]])


def test_block_model_structure():
    rng = np.random.default_rng(3)
    model = scenario_model("G3", 20, 5, rng)
    labels = model.assignment.labels
    for i in range(20):
        for j in range(20):
            if i != j:
                assert model.Sigma[i, j] == model.Q[labels[i], labels[j]]
    assert np.all((model.gamma >= 0.25) & (model.gamma <= 0.5))
    assert np.linalg.eigvalsh(model.Sigma)[0] > 0


def test_singleton_gamma_is_zero():
    rng = np.random.default_rng(4)
    model = scenario_model("G4", 10, 10, rng)
    assert np.all(model.gamma == 0)
    model = scenario_model("G4", 10, 7, rng, uneven=True)
    singles = model.assignment.sizes[model.assignment.labels] == 1
    assert np.all(model.gamma[singles] == 0) and np.all(model.gamma[~singles] > 0)


def test_singular_precision_rejected():
    O = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(SingularMatrixError):
        build_block_model(PrecisionGraph(O), build_assignment(4, 2), 0.25, 0.5, np.random.default_rng(0))


@pytest.mark.parametrize("name", ["G1", "G2", "G3", "G4", "G5", "G6"])
@pytest.mark.parametrize("seed", range(5))
def test_woodbury_matches_dense_inverse(name, seed):
    model = scenario_model(name, 30, 10, np.random.default_rng(seed))
    W = woodbury_precision(model.assignment.matrix(), model.O, model.gamma)
    assert np.abs(W - np.linalg.inv(model.Sigma)).max() <= 1e-10


@pytest.mark.parametrize("name", ["G1", "G2", "G3", "G4", "G5", "G6"])
def test_cluster_gap_positive(name):
    for seed in range(5):
        model = scenario_model(name, 20, 5, np.random.default_rng(seed))
        assert cluster_gap(model.Sigma, model.assignment) > 0


def test_embeddings_identical_rows_without_noise():
    model = build_block_model(gen_independent_graph(1, 1.0), build_assignment(2, 1), 0.0, 0.0,
                              np.random.default_rng(0))
    V = sample_embeddings(model, 30, np.random.default_rng(1))
    np.testing.assert_array_equal(V[0], V[1])


def test_embeddings_sample_covariance():
    model = scenario_model("G3", 6, 3, np.random.default_rng(5))
    p = 100_000
    V = sample_embeddings(model, p, np.random.default_rng(6))
    cov = V @ V.T / p
    S = model.Sigma
    se = np.sqrt((S**2 + np.outer(np.diag(S), np.diag(S))) / p)
    assert np.all(np.abs(cov - S) <= 3.5 * se)


def test_embeddings_gram_concentrates():
    model = scenario_model("G3", 8, 4, np.random.default_rng(7))
    labels = model.assignment.labels
    i, j = 0, 2  # different clusters
    target = model.Q[labels[i], labels[j]]
    mads = []
    for p in (100, 400, 1600):
        rng = np.random.default_rng(p)
        dev = [abs(V[i] @ V[j] / p - target) for V in (sample_embeddings(model, p, rng) for _ in range(400))]
        mads.append(np.median(dev))
    assert mads[1] < 0.65 * mads[0] and mads[2] < 0.65 * mads[1]


def test_embeddings_seed_determinism():
    model = scenario_model("G5", 20, 10, np.random.default_rng(0))
    a = sample_embeddings(model, 50, np.random.default_rng(11))
    b = sample_embeddings(model, 50, np.random.default_rng(11))
    assert np.array_equal(a, b)


def test_model_json_round_trip(tmp_path):
    model = scenario_model("G6", 12, 4, np.random.default_rng(2), seed=42)
    model.save(tmp_path / "m.json")
    doc = json.loads((tmp_path / "m.json").read_text())
    assert doc["labels"][:3] == [1, 1, 1] and doc["seed"] == 42
    back = BlockModel.load(tmp_path / "m.json")
    np.testing.assert_array_equal(back.O, model.O)
    np.testing.assert_array_equal(back.Sigma, model.Sigma)
    assert back.assignment == model.assignment
