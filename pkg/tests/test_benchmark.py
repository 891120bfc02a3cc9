from collections import Counter

import pytest

from linklogic.benchmark import Category, build_benchmark, read_benchmark, write_benchmark
from linklogic.kg import ConfigError, KnowledgeGraph, Triple, Vocabulary
from linklogic.paths import Path


def test_mozart_categories(mozart):
    bench = build_benchmark(mozart, include_query_inverse=True)
    P, C = mozart.relations.id("parent"), mozart.relations.id("child")
    query = Triple(0, P, 2)  # Maria parent Leopold
    cats = Counter(e.category for e in bench.entries_for(query))
    assert cats[Category.QUERY_INVERSE] == 1
    assert all(cats[c] == 2 for c in Category if c is not Category.QUERY_INVERSE)
    assert bench.ideal_relevances(query) == [1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5]
    assert len(bench.queries) == 4 and len(bench.entries) == 52
    assert bench.relevance_of(query, Path((2, 0), (C,))) == 1.0
    assert bench.sibling_counts[query] == 1


def test_inverse_toggle(mozart):
    bench = build_benchmark(mozart)
    assert not any(e.category is Category.QUERY_INVERSE for e in bench.entries)
    assert bench.summary()["category_counts"][Category.QUERY_INVERSE.value] == 0


def test_only_child_without_coparent_has_only_inverse():
    ents = Vocabulary(["kid", "mum"])
    rels = Vocabulary(["parent", "child", "spouse", "sibling"])
    g = KnowledgeGraph([(0, 0, 1), (1, 1, 0)], ents, rels)
    bench = build_benchmark(g, include_query_inverse=True)
    assert [e.category for e in bench.entries] == [Category.QUERY_INVERSE]
    assert bench.summary()["n_queries_excluding_inverse_only"] == 0


def test_relevance_ignores_orientation(mozart):
    bench = build_benchmark(mozart)
    P, C, B = (mozart.relations.id(n) for n in ("parent", "child", "sibling"))
    query = Triple(0, P, 2)
    # Wolfgang parent Leopold and Leopold child Wolfgang are the same fact
    assert bench.relevance_of(query, Path((1, 2), (P,))) == bench.relevance_of(query, Path((2, 1), (C,))) == 1.0
    # sibling written either way, two-hop written from either end
    assert bench.relevance_of(query, Path((1, 0), (B,))) == 1.0
    assert bench.relevance_of(query, Path((2, 1, 0), (C, B))) == bench.relevance_of(query, Path((0, 1, 2), (B, P)))
    assert bench.relevance_of(query, Path((0, 4), (P,))) == 0.0


def test_jsonl_roundtrip(tmp_path, mozart):
    bench = build_benchmark(mozart, include_query_inverse=True)
    out = tmp_path / "bench.jsonl"
    summary = write_benchmark(bench, mozart, out)
    assert (tmp_path / "bench.summary.json").exists()
    back = read_benchmark(out, mozart)
    assert back.entries == bench.entries
    assert back.sibling_counts == bench.sibling_counts
    assert back.summary() == summary


def test_missing_parent_relation():
    g = KnowledgeGraph([(0, 0, 1)], Vocabulary("ab"), Vocabulary(["friend"]))
    with pytest.raises(ConfigError):
        build_benchmark(g)


def test_synthetic_benchmark_covers_parent_triples(corpus):
    bench = build_benchmark(corpus, include_query_inverse=True)
    P = corpus.relations.id("parent")
    parent_triples = {t for t in corpus.triples if t.relation == P}
    assert set(bench.queries) == parent_triples
    assert max(bench.sibling_counts.values()) >= 4
