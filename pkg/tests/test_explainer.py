import json
import math

import numpy as np
import pytest

from conftest import random_store
from linklogic.explainer import (
    PerturbationConfig,
    compute_features,
    compute_labels,
    compute_sigmas,
    explain,
    fidelity_r2,
    perturb_queries,
)
from linklogic.kg import ConfigError, KnowledgeGraph, Triple, Vocabulary
from linklogic.kge import plausibility, score_raw
from linklogic.paths import FeatureSpec, Path, path_score


def literal_sigmas(store, query, k):
    n = store.n_entities
    h, r, t = query

    def best(scores):
        return sorted(range(n), key=lambda e: (-scores[e], e))[:k]

    def rms(center, ids):
        total, count = 0.0, 0
        for e in ids:
            for i in range(store.dim):
                diff = store.entities[e][i] - store.entities[center][i]
                total += diff.real**2 + diff.imag**2
                count += 2
        return math.sqrt(total / count)

    h_nb, t_nb = [], []
    for e in best([score_raw(store, h, r, x) for x in range(n)]):
        h_nb += best([score_raw(store, x, r, e) for x in range(n)])
    for e in best([score_raw(store, x, r, t) for x in range(n)]):
        t_nb += best([score_raw(store, e, r, x) for x in range(n)])
    return rms(h, h_nb), rms(t, t_nb)


@pytest.mark.parametrize("seed", range(6))
def test_sigmas_match_literal_loop(seed):
    rng = np.random.default_rng(seed)
    store = random_store(int(rng.integers(4, 20)), 2, int(rng.integers(2, 6)), seed=seed)
    query = Triple(0, 1, store.n_entities - 1)
    k = int(rng.integers(1, 4))
    got = compute_sigmas(store, query, k)
    want = literal_sigmas(store, query, k)
    assert got == pytest.approx(want, abs=1e-12)


def test_zero_alpha_reproduces_unperturbed_values():
    store = random_store(10, 2, 4, seed=1)
    query = Triple(2, 1, 7)
    pq = perturb_queries(store, query, 0.7, 0.3, alpha=0.0, n=15, seed=0)
    y = compute_labels(store, query, pq)
    np.testing.assert_allclose(y, -math.log1p(-plausibility(store, 2, 1, 7)), rtol=1e-12)
    paths = [Path((2, 4, 7), (0, 1)), Path((7, 2), (0,)), Path((3, 5), (1,)), Path((2, 7), (1,))]
    X = compute_features(store, query, pq, paths)
    for j, p in enumerate(paths):
        np.testing.assert_allclose(X[:, j], path_score(store, p.entities, p.relations), rtol=1e-12)


def test_features_match_pointwise_scores_under_perturbation():
    store = random_store(9, 3, 5, seed=2)
    query = Triple(1, 2, 6)
    pq = perturb_queries(store, query, 0.5, 0.5, alpha=1.0, n=12, seed=4)
    paths = [Path((1, 3, 6), (0, 2)), Path((6, 1), (1,)), Path((6, 0, 1), (2, 2)), Path((1, 6), (2,))]
    X = compute_features(store, query, pq, paths)
    for i in range(12):
        sub = {1: pq.heads[i], 6: pq.tails[i]}
        for j, p in enumerate(paths):
            ents = [sub.get(e, e) for e in p.entities]
            assert X[i, j] == pytest.approx(path_score(store, ents, p.relations), rel=1e-10)
    # the one-hop path equal to the query reproduces the labels
    np.testing.assert_allclose(X[:, 3], compute_labels(store, query, pq), rtol=1e-12)


def test_perturbation_scale():
    store = random_store(5, 1, 400, seed=0)
    query = Triple(0, 0, 1)
    pq = perturb_queries(store, query, 0.2, 0.05, alpha=2.0, n=50, seed=1)
    dh = pq.heads - store.entities[0]
    dt = pq.tails - store.entities[1]
    assert np.std(dh.real) == pytest.approx(0.4, rel=0.02)
    assert np.std(dt.imag) == pytest.approx(0.1, rel=0.02)


def test_r2_closed_form():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    assert fidelity_r2(y, y) == 1.0
    assert fidelity_r2(y, np.full(4, 2.5)) == 0.0
    assert fidelity_r2(y, np.array([1.0, 3.0, 3.0, 4.0])) == pytest.approx(1 - 1 / 5)
    assert fidelity_r2(np.ones(3), np.zeros(3)) == 0.0


@pytest.fixture(scope="module")
def trained(request):
    corpus = request.getfixturevalue("corpus")
    store = request.getfixturevalue("desk_store")
    parent = corpus.relations.id("parent")
    query = next(t for t in corpus.triples if t.relation == parent)
    return corpus, store, query


def test_explanation_is_deterministic_and_well_formed(trained):
    corpus, store, query = trained
    cfg = PerturbationConfig(n=200, seed=5)
    a = explain(store, corpus, query, cfg)
    b = explain(store, corpus, query, cfg)
    assert json.dumps(a.to_json(corpus), sort_keys=True) == json.dumps(b.to_json(corpus), sort_keys=True)
    coefs = [c for _, c, _ in a.ranked_paths]
    assert all(c > 0 for c in coefs) and coefs == sorted(coefs, reverse=True)
    assert a.n_paths == len(a.ranked_paths) <= a.diagnostics["m_effective"]
    assert a.diagnostics["n_fit"] + a.diagnostics["n_holdout"] == 200
    assert a.fidelity_r2 <= 1.0
    c = explain(store, corpus, query, PerturbationConfig(n=200, seed=6))
    assert c.diagnostics["sigma_h"] == a.diagnostics["sigma_h"]
    assert c.holdout[0].tolist() != a.holdout[0].tolist()


def test_inverse_excluded_from_explanation(trained):
    corpus, store, query = trained
    spec = FeatureSpec(exclude_query_inverse=True)
    inverse = spec.query_inverse(query, corpus.relations)
    exp = explain(store, corpus, query, PerturbationConfig(n=200), spec)
    assert inverse not in [p for p, _, _ in exp.ranked_paths]


def test_empty_pool():
    store = random_store(4, 1, 3, seed=0)
    graph = KnowledgeGraph([Triple(0, 0, 1)], Vocabulary("abcd"), Vocabulary(["r"]))
    exp = explain(store, graph, Triple(0, 0, 1), PerturbationConfig(n=50), paths=[])
    assert exp.n_paths == 0 and exp.fidelity_r2 == 0.0 and exp.diagnostics["m_effective"] == 0


def test_scatter_csv(tmp_path, trained):
    corpus, store, query = trained
    exp = explain(store, corpus, query, PerturbationConfig(n=100))
    path = tmp_path / "scatter.csv"
    exp.write_scatter_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "y_true,y_pred" and len(lines) == 1 + exp.diagnostics["n_holdout"]


@pytest.mark.parametrize(
    "kwargs", [{"n": 5}, {"k": 0}, {"lam": -1.0}, {"holdout_fraction": 0.6}, {"penalty_scale": "mean"}]
)
def test_config_validation(kwargs):
    with pytest.raises(ConfigError):
        PerturbationConfig(**kwargs)
