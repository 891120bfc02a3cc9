import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_store
from linklogic.heuristic import HeuristicConfig, heuristic_explain
from linklogic.kg import ConfigError, KnowledgeGraph, Triple, Vocabulary
from linklogic.kge import plausibility
from linklogic.paths import select_paths

STORE = random_store(10, 2, 3, seed=8)
GRAPH = KnowledgeGraph([Triple(0, 0, 1)], Vocabulary(f"e{i}" for i in range(10)), Vocabulary(["a", "b"]))
QUERY = Triple(0, 0, 1)
POOL = select_paths(STORE, GRAPH, QUERY, HeuristicConfig())


def kept(threshold, mode="per_hop"):
    exp = heuristic_explain(STORE, GRAPH, QUERY, HeuristicConfig(threshold, mode), paths=POOL)
    return [p for p, _, _ in exp.ranked_paths]


@settings(max_examples=50)
@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from(["per_hop", "path"]))
def test_higher_threshold_keeps_subset(a, b, mode):
    lo, hi = sorted((a, b))
    assert set(kept(hi, mode)) <= set(kept(lo, mode))


def test_threshold_extremes():
    assert len(kept(0.0)) == len(POOL)
    assert kept(1.0) == [] and kept(1.0, "path") == []


def test_per_hop_rule_and_ranking():
    exp = heuristic_explain(STORE, GRAPH, QUERY, HeuristicConfig(0.6), paths=POOL)
    for p, _, _ in exp.ranked_paths:
        assert all(plausibility(STORE, *hop) >= 0.6 for hop in p.hops())
    scores = [s for _, s, _ in exp.ranked_paths]
    assert scores == sorted(scores, reverse=True)
    assert exp.n_paths == len(exp.ranked_paths)
    assert HeuristicConfig(0.95).label == "heuristic@0.95"


def test_bad_config():
    with pytest.raises(ConfigError):
        HeuristicConfig(1.5)
    with pytest.raises(ConfigError):
        HeuristicConfig(0.9, "sum")
