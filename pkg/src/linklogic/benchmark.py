"""Parents Benchmark: commonsense explanatory paths for (child, parent, parent-entity) queries."""

from __future__ import annotations

import enum
import json
import os
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable

from .kg import ConfigError, DatasetSplit, FamilyRelations, KnowledgeGraph, Triple, parents_by_child
from .paths import Path


class Category(str, enum.Enum):
    QUERY_INVERSE = "{p, child, c}"
    SIBLING_PARENT = "{c, sibling, s, parent, p}"
    PARENT_CHILD_SIBLING = "{p, child, s}"
    SIBLING = "{c, sibling, s}"
    COPARENT_SPOUSE = "{c, parent, p2, spouse, p}"
    COPARENT = "{c, parent, p2}"
    SPOUSE = "{p, spouse, p2}"

    @property
    def confidence(self) -> float:
        return 0.5 if self in (Category.COPARENT_SPOUSE, Category.COPARENT, Category.SPOUSE) else 1.0

    @property
    def dataset(self) -> str:
        return "FB14-only" if self in (Category.SIBLING_PARENT, Category.SIBLING) else "FB13+FB14"


@dataclass(frozen=True)
class BenchmarkEntry:
    query: Triple
    path: Path
    category: Category
    split_tags: tuple[str, ...] = ()

    @property
    def confidence(self) -> float:
        return self.category.confidence

    @property
    def dataset(self) -> str:
        return self.category.dataset


class FamilyIndex:
    """Orientation-normalized lookup of family facts.

    Parent/child edges map to ("P", child, parent); spouse and sibling edges to
    unordered pairs; anything else stays a directed (relation, head, tail) fact.
    """

    def __init__(self, graph: KnowledgeGraph, family: FamilyRelations):
        rels = graph.relations
        self.parent = rels.get(family.parent)
        self.child = rels.get(family.child)
        self.spouse = rels.get(family.spouse)
        self.sibling = rels.get(family.sibling)

    def fact(self, h: int, r: int, t: int) -> tuple:
        if r == self.parent:
            return ("P", h, t)
        if r == self.child:
            return ("P", t, h)
        if r == self.spouse:
            return ("S", min(h, t), max(h, t))
        if r == self.sibling:
            return ("B", min(h, t), max(h, t))
        return ("R", r, h, t)

    def key(self, path: Path) -> tuple:
        return tuple(sorted(self.fact(*hop) for hop in path.hops()))


@dataclass
class Benchmark:
    entries: list[BenchmarkEntry]
    index: FamilyIndex
    include_query_inverse: bool
    sibling_counts: dict[Triple, int] = field(default_factory=dict)
    by_query: dict[Triple, list[int]] = field(default_factory=dict)
    _relevance: dict[Triple, dict[tuple, float]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        by_query: dict[Triple, list[int]] = defaultdict(list)
        relevance: dict[Triple, dict[tuple, float]] = defaultdict(dict)
        for i, e in enumerate(self.entries):
            by_query[e.query].append(i)
            key = self.index.key(e.path)
            relevance[e.query][key] = max(relevance[e.query].get(key, 0.0), e.confidence)
        self.by_query = dict(by_query)
        self._relevance = dict(relevance)

    @property
    def queries(self) -> list[Triple]:
        return sorted(self.by_query)

    def entries_for(self, query: Triple) -> list[BenchmarkEntry]:
        return [self.entries[i] for i in self.by_query.get(query, [])]

    def relevance_of(self, query: Triple, path: Path) -> float:
        return self._relevance.get(query, {}).get(self.index.key(path), 0.0)

    def ideal_relevances(self, query: Triple) -> list[float]:
        """One relevance per distinct (orientation-normalized) benchmark path, descending."""
        return sorted(self._relevance.get(query, {}).values(), reverse=True)

    def summary(self) -> dict:
        counts = {q: len(ix) for q, ix in self.by_query.items()}
        non_inverse = sum(
            1
            for q, ix in self.by_query.items()
            if any(self.entries[i].category is not Category.QUERY_INVERSE for i in ix)
        )
        hist = Counter(counts.values())
        cats = Counter(e.category.value for e in self.entries)
        return {
            "include_query_inverse": self.include_query_inverse,
            "n_entries": len(self.entries),
            "n_queries": len(self.by_query),
            "n_queries_excluding_inverse_only": non_inverse,
            "entries_per_query_histogram": {str(k): hist[k] for k in sorted(hist)},
            "category_counts": {c.value: cats.get(c.value, 0) for c in Category},
            "sibling_count_histogram": {
                str(k): v for k, v in sorted(Counter(self.sibling_counts[q] for q in self.by_query).items())
            },
        }


def relevance_of(benchmark: Benchmark, query: Triple, path: Path) -> float:
    return benchmark.relevance_of(query, path)


def structural_siblings(graph: KnowledgeGraph, family: FamilyRelations) -> dict[int, set[int]]:
    """Children sharing exactly the same two parents, plus explicit sibling edges."""
    out: dict[int, set[int]] = defaultdict(set)
    groups: dict[frozenset, list[int]] = defaultdict(list)
    for c, ps in parents_by_child(graph, graph.relations.id(family.parent)).items():
        if len(ps) == 2:
            groups[frozenset(ps)].append(c)
    for children in groups.values():
        for a in children:
            out[a].update(x for x in children if x != a)
    sib = graph.relations.get(family.sibling)
    if sib is not None:
        for h, r, t in graph.triples:
            if r == sib and h != t:
                out[h].add(t)
                out[t].add(h)
    return out


def build_benchmark(
    data: KnowledgeGraph | DatasetSplit,
    include_query_inverse: bool = False,
    family: FamilyRelations | None = None,
) -> Benchmark:
    """Instantiate every benchmark path category for every parent triple.

    ``data`` is either a combined graph or a split (then all splits are combined
    and per-edge split membership is recorded). Only paths whose edges exist
    are emitted, in each forward orientation present.
    """
    if isinstance(data, DatasetSplit):
        graph, membership = data.combined(), data.split_membership()
    else:
        graph, membership = data, {}
    family = family or FamilyRelations.detect(graph.relations)
    if family.parent not in graph.relations:
        raise ConfigError(f"relation {family.parent!r} not present; cannot build the benchmark")
    index = FamilyIndex(graph, family)
    P, C, S, B = index.parent, index.child, index.spouse, index.sibling

    parents_of: dict[int, set[int]] = defaultdict(set)
    for h, r, t in graph.triples:
        if r == P:
            parents_of[h].add(t)
        elif r == C:
            parents_of[t].add(h)
    siblings = structural_siblings(graph, family)

    def has(h, r, t) -> bool:
        return r is not None and Triple(h, r, t) in graph

    entries: list[BenchmarkEntry] = []
    sibling_counts: dict[Triple, int] = {}

    def emit(query, category, ents, rels):
        if not all(has(a, r, b) for a, r, b in zip(ents, rels, ents[1:])):
            return
        tags = tuple(membership.get(Triple(a, r, b), "") for a, r, b in zip(ents, rels, ents[1:]))
        entries.append(BenchmarkEntry(query, Path(tuple(ents), tuple(rels)), category, tags))

    for query in graph.triples:
        if query.relation != P:
            continue
        c, p = query.head, query.tail
        sibs = sorted(siblings.get(c, set()) - {c, p})
        co_parents = sorted(parents_of.get(c, set()) - {p, c})
        sibling_counts[query] = len(sibs)
        if include_query_inverse:
            emit(query, Category.QUERY_INVERSE, (p, c), (C,))
        for s in sibs:
            emit(query, Category.SIBLING_PARENT, (c, s, p), (B, P))
            emit(query, Category.SIBLING_PARENT, (p, s, c), (C, B))
        for s in sibs:
            emit(query, Category.PARENT_CHILD_SIBLING, (p, s), (C,))
            emit(query, Category.PARENT_CHILD_SIBLING, (s, p), (P,))
        for s in sibs:
            emit(query, Category.SIBLING, (c, s), (B,))
            emit(query, Category.SIBLING, (s, c), (B,))
        for p2 in co_parents:
            emit(query, Category.COPARENT_SPOUSE, (c, p2, p), (P, S))
            emit(query, Category.COPARENT_SPOUSE, (p, p2, c), (S, C))
        for p2 in co_parents:
            emit(query, Category.COPARENT, (c, p2), (P,))
            emit(query, Category.COPARENT, (p2, c), (C,))
        for p2 in co_parents:
            emit(query, Category.SPOUSE, (p, p2), (S,))
            emit(query, Category.SPOUSE, (p2, p), (S,))

    return Benchmark(entries, index, include_query_inverse, sibling_counts)


# ---------------------------------------------------------------------------
# persistence


def write_benchmark(benchmark: Benchmark, graph: KnowledgeGraph, path: str | os.PathLike) -> dict:
    """JSON-lines entries at ``path`` and a ``<stem>.summary.json`` next to it."""
    ents, rels = graph.entities, graph.relations
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in benchmark.entries:
            record = {
                "query": list(graph.triple_names(e.query)),
                "path": e.path.names(ents, rels),
                "category": e.category.value,
                "confidence": e.confidence,
                "dataset": e.dataset,
                "split_tags": list(e.split_tags),
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    summary = benchmark.summary()
    stem = os.fspath(path)
    stem = stem[: -len(".jsonl")] if stem.endswith(".jsonl") else stem
    with open(stem + ".summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def read_benchmark(path: str | os.PathLike, graph: KnowledgeGraph, family: FamilyRelations | None = None) -> Benchmark:
    family = family or FamilyRelations.detect(graph.relations)
    entries, include_inverse = [], False
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            category = Category(rec["category"])
            include_inverse |= category is Category.QUERY_INVERSE
            entries.append(
                BenchmarkEntry(
                    graph.parse_triple(*rec["query"]),
                    Path.from_names(rec["path"], graph.entities, graph.relations),
                    category,
                    tuple(rec.get("split_tags", ())),
                )
            )
    # sibling counts are structural; recompute from the graph
    siblings = structural_siblings(graph, family)
    queries: Iterable[Triple] = {e.query for e in entries}
    counts = {q: len(siblings.get(q.head, set()) - {q.head, q.tail}) for q in queries}
    return Benchmark(entries, FamilyIndex(graph, family), include_inverse, counts)
