import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linklogic.benchmark import build_benchmark
from linklogic.kg import Triple
from linklogic.metrics import dcg_at_k, ndcg_at_k, query_ndcg, ranked_relevances
from linklogic.paths import Path


def test_hand_values():
    assert ndcg_at_k([1.0], [1.0], 1) == 1.0
    assert ndcg_at_k([0.5, 1.0], [1.0, 0.5], 2) == pytest.approx(0.8597, abs=5e-5)
    assert ndcg_at_k([0.0, 1.0], [1.0], 2) == pytest.approx(1 / math.log2(3), abs=5e-5)
    assert ndcg_at_k([], [1.0, 0.5], 3) == 0.0
    assert ndcg_at_k([1.0], [], 1) == 0.0
    assert dcg_at_k([1.0, 1.0], 2, "exponential") == pytest.approx(1 + 1 / math.log2(3))
    with pytest.raises(ValueError):
        ndcg_at_k([1.0], [1.0], 0)


relevance_lists = st.lists(st.sampled_from([0.0, 0.5, 1.0]), min_size=1, max_size=10)


@settings(max_examples=80)
@given(relevance_lists, st.integers(1, 10), st.integers(0, 2**31))
def test_depends_only_on_order(rels, k, seed):
    rng = np.random.default_rng(seed)
    scores = rng.normal(size=len(rels))
    order = np.argsort(-scores, kind="stable")
    mapped = np.exp(3 * scores) + 7  # strictly increasing map
    order_mapped = np.argsort(-mapped, kind="stable")
    a = ndcg_at_k([rels[i] for i in order], rels, k)
    b = ndcg_at_k([rels[i] for i in order_mapped], rels, k)
    assert a == b


@settings(max_examples=80)
@given(relevance_lists, st.integers(1, 10), st.data())
def test_non_decreasing_in_relevance(rels, k, data):
    i = data.draw(st.integers(0, len(rels) - 1))
    bumped = list(rels)
    bumped[i] = data.draw(st.floats(rels[i], 1.0))
    ideal = [1.0] * len(rels)
    assert ndcg_at_k(bumped, ideal, k) >= ndcg_at_k(rels, ideal, k) - 1e-15


@settings(max_examples=50)
@given(relevance_lists)
def test_ideal_ranking_scores_one(rels):
    if max(rels) == 0:
        return
    ideal = sorted(rels, reverse=True)
    for k in range(1, 8):
        assert ndcg_at_k(ideal, rels, k) == pytest.approx(1.0)


def test_benchmark_ndcg_counts_equivalent_paths_once(mozart):
    bench = build_benchmark(mozart)
    P, C = mozart.relations.id("parent"), mozart.relations.id("child")
    query = Triple(0, P, 2)
    same = [Path((1, 2), (P,)), Path((2, 1), (C,))]
    assert ranked_relevances(bench, query, same) == [1.0, 0.0]
    assert query_ndcg(bench, query, same[:1], 1) == 1.0
