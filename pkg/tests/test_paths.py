import math
from dataclasses import dataclass

import numpy as np
import pytest

from conftest import random_store
from linklogic.kg import KnowledgeGraph, Triple, Vocabulary
from linklogic.kge import plausibility
from linklogic.paths import ExcludeRule, FeatureSpec, Path, PathRole, hop_value, path_score, select_paths


@dataclass(frozen=True)
class PoolConfig:
    m: int
    fanout: int


def test_path_shape_and_key():
    p = Path((3, 1, 4), (0, 2))
    assert p.length == 2
    assert p.hops() == [(3, 0, 1), (1, 2, 4)]
    assert p.key() == (3, 0, 1, 2, 4)
    with pytest.raises(ValueError):
        Path((1, 2), (0, 0))
    ents, rels = Vocabulary(["a", "b", "c", "d", "e"]), Vocabulary(["x", "y", "z"])
    assert p.format(ents, rels) == "d -x-> b -z-> e"
    assert Path.from_names(p.names(ents, rels), ents, rels) == p


def test_hop_value_and_path_score():
    assert hop_value(0.5) == pytest.approx(math.log(2))
    store = random_store(5, 2, 4, seed=0)
    f1 = plausibility(store, 0, 1, 2)
    f2 = plausibility(store, 2, 0, 3)
    want = (-math.log(1 - f1) - math.log(1 - f2)) / 2
    assert path_score(store, (0, 2, 3), (1, 0)) == pytest.approx(want, rel=1e-12)
    assert path_score(store, (0, 2), (1,)) == pytest.approx(-math.log(1 - f1), rel=1e-12)


def brute_force_pool(store, query, m, fanout, banned=()):
    """Literal enumeration of the candidate pool, one triple at a time."""
    h, t = query.head, query.tail
    n_e, n_r = store.n_entities, store.n_relations
    value = {}

    def v(a, r, b):
        if (a, r, b) not in value:
            value[(a, r, b)] = -math.log1p(-plausibility(store, a, r, b))
        return value[(a, r, b)]

    def top(scored):
        return [e for _, e in sorted(scored, key=lambda se: (-se[0], se[1]))[:fanout]]

    pool, partners = [], set()
    for r in range(n_r):
        group = {}
        for a in (h, t):
            outs = [e for e in top([(v(a, r, e), e) for e in range(n_e)]) if e != a]
            ins = [e for e in top([(v(e, r, a), e) for e in range(n_e)]) if e != a]
            partners.update(outs + ins)
            for first, last in [(a, e) for e in outs] + [(e, a) for e in ins]:
                if (first, r, last) == (h, query.relation, t) or (first, r, last) in banned:
                    continue
                group[(first, last)] = v(first, r, last)
        ranked = sorted(group.items(), key=lambda kv: (-kv[1], kv[0]))[:m]
        pool += [(Path(k, (r,)), s) for k, s in ranked]
    mids = sorted(partners - {h, t})
    for r1 in range(n_r):
        for r2 in range(n_r):
            group = []
            for start, end in ((h, t), (t, h)):
                for x in mids:
                    group.append((Path((start, x, end), (r1, r2)), (v(start, r1, x) + v(x, r2, end)) / 2))
            group.sort(key=lambda ps: (-ps[1], ps[0].key()))
            pool += group[:m]
    pool.sort(key=lambda ps: (-ps[1], ps[0].key()))
    return pool


def small_graph(n_e, n_r):
    ents = Vocabulary(f"e{i}" for i in range(n_e))
    rels = Vocabulary(f"r{i}" for i in range(n_r))
    return KnowledgeGraph([Triple(0, 0, 1)], ents, rels)


@pytest.mark.parametrize("seed", range(8))
def test_pool_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n_e = int(rng.integers(5, 16))
    n_r = int(rng.integers(1, 4))
    store = random_store(n_e, n_r, 4, seed=100 + seed)
    graph = small_graph(n_e, n_r)
    h, t = rng.choice(n_e, size=2, replace=False)
    query = Triple(int(h), int(rng.integers(n_r)), int(t))
    for m, fanout in ((3, n_e), (2, 4), (50, 50)):
        got = select_paths(store, graph, query, PoolConfig(m, fanout))
        want = brute_force_pool(store, query, m, fanout)
        assert [sp.path for sp in got] == [p for p, _ in want]
        np.testing.assert_allclose([sp.score for sp in got], [s for _, s in want], rtol=1e-10)


def test_roles_and_query_never_a_feature():
    store = random_store(8, 2, 4, seed=3)
    graph = small_graph(8, 2)
    query = Triple(1, 0, 5)
    pool = select_paths(store, graph, query, PoolConfig(50, 50))
    for sp in pool:
        assert sp.path.hops() != [(1, 0, 5)]
        ends = {sp.path.entities[0], sp.path.entities[-1]}
        if sp.role is PathRole.BRIDGE_TWO_HOP:
            assert ends == {1, 5} and sp.path.length == 2
        elif sp.role is PathRole.HEAD_ONE_HOP:
            assert 1 in ends
        else:
            assert 5 in ends and 1 not in ends


def test_query_inverse_exclusion(mozart):
    store = random_store(len(mozart.entities), len(mozart.relations), 6, seed=11)
    parent, child = mozart.relations.id("parent"), mozart.relations.id("child")
    query = Triple(0, parent, 2)  # Maria parent Leopold
    inverse = Path((2, 0), (child,))
    cfg = PoolConfig(20, 50)
    assert inverse in [sp.path for sp in select_paths(store, mozart, query, cfg)]
    spec = FeatureSpec(exclude_query_inverse=True)
    assert spec.query_inverse(query, mozart.relations) == inverse
    kept = [sp.path for sp in select_paths(store, mozart, query, cfg, spec)]
    assert inverse not in kept
    # the reversed orientation (h, child, t) is a different path and stays
    assert Path((0, 2), (child,)) in kept
    want = [p for p, _ in brute_force_pool(store, query, 20, 50, banned={(2, child, 0)})]
    assert kept == want


def test_custom_rule_on_two_hop_paths(mozart):
    store = random_store(len(mozart.entities), len(mozart.relations), 6, seed=12)
    query = Triple(0, mozart.relations.id("parent"), 2)
    rule = ExcludeRule(("sibling", "parent"), start="h", end="t")
    spec = FeatureSpec(exclude=(rule,))
    sib, par = mozart.relations.id("sibling"), mozart.relations.id("parent")
    pool = select_paths(store, mozart, query, PoolConfig(20, 50), spec)
    assert not any(sp.path.relations == (sib, par) and sp.path.entities[0] == 0 for sp in pool)
    assert any(sp.path.relations == (sib, par) for sp in select_paths(store, mozart, query, PoolConfig(20, 50)))
