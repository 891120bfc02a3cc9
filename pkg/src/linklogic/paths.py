"""Paths, path scores and the candidate pool around a query triple."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .kg import FamilyRelations, KnowledgeGraph, Triple, Vocabulary
from .kge import EmbeddingStore, head_scores, plausibility, squash, tail_scores


class PathRole(str, enum.Enum):
    HEAD_ONE_HOP = "head_one_hop"
    TAIL_ONE_HOP = "tail_one_hop"
    BRIDGE_TWO_HOP = "bridge_two_hop"


@dataclass(frozen=True, order=True)
class Path:
    """Ordered entity/relation sequence e1 -r1-> e2 -r2-> ... ; hops need not exist in the graph."""

    entities: tuple[int, ...]
    relations: tuple[int, ...]

    def __post_init__(self):
        if len(self.entities) != len(self.relations) + 1 or not self.relations:
            raise ValueError("a path of length l needs l relations and l + 1 entities")

    @property
    def length(self) -> int:
        return len(self.relations)

    def hops(self) -> list[tuple[int, int, int]]:
        e, r = self.entities, self.relations
        return [(e[j], r[j], e[j + 1]) for j in range(len(r))]

    def key(self) -> tuple[int, ...]:
        """Interleaved (e1, r1, e2, ...) tuple used for lexicographic tie-breaks."""
        out = [self.entities[0]]
        for r, e in zip(self.relations, self.entities[1:]):
            out += [r, e]
        return tuple(out)

    def names(self, entities: Vocabulary, relations: Vocabulary) -> list[str]:
        out = [entities.name(self.entities[0])]
        for r, e in zip(self.relations, self.entities[1:]):
            out += [relations.name(r), entities.name(e)]
        return out

    def format(self, entities: Vocabulary, relations: Vocabulary) -> str:
        parts = self.names(entities, relations)
        text = parts[0]
        for i in range(1, len(parts), 2):
            text += f" -{parts[i]}-> {parts[i + 1]}"
        return text

    @classmethod
    def from_names(cls, names: Sequence[str], entities: Vocabulary, relations: Vocabulary) -> "Path":
        if len(names) % 2 == 0:
            raise ValueError("path name lists alternate entity, relation, ..., entity")
        return cls(
            tuple(entities.id(n) for n in names[0::2]),
            tuple(relations.id(n) for n in names[1::2]),
        )


@dataclass(frozen=True)
class ScoredPath:
    path: Path
    role: PathRole
    score: float


def hop_value(f):
    """-log(1 - f): the per-hop term of the path score."""
    return -np.log1p(-f)


def path_score(store: EmbeddingStore, entities: Sequence, relations: Sequence) -> float:
    """Mean over hops of -log(1 - plausibility). Entities may be ids or raw vectors."""
    if len(entities) != len(relations) + 1 or not relations:
        raise ValueError("entities/relations lengths inconsistent")
    total = 0.0
    for j, r in enumerate(relations):
        total += hop_value(plausibility(store, entities[j], r, entities[j + 1]))
    return float(total / len(relations))


# ---------------------------------------------------------------------------
# feature exclusion


@dataclass(frozen=True)
class ExcludeRule:
    """Drop candidate paths whose relation names equal ``relations`` and whose
    first/last entity is the query head ("h"), tail ("t") or anything (None)."""

    relations: tuple[str, ...]
    start: str | None = None
    end: str | None = None


@dataclass(frozen=True)
class FeatureSpec:
    exclude_query_inverse: bool = False
    exclude: tuple[ExcludeRule, ...] = ()
    family: FamilyRelations | None = None

    def rules(self, query: Triple, relations: Vocabulary) -> list[ExcludeRule]:
        rules = list(self.exclude)
        if self.exclude_query_inverse:
            family = self.family or FamilyRelations.detect(relations)
            inverse = family.inverse(relations.name(query.relation))
            if inverse is not None:
                rules.append(ExcludeRule((inverse,), start="t", end="h"))
        return rules

    def query_inverse(self, query: Triple, relations: Vocabulary) -> Path | None:
        family = self.family or FamilyRelations.detect(relations)
        inverse = family.inverse(relations.name(query.relation))
        if inverse is None or inverse not in relations:
            return None
        return Path((query.tail, query.head), (relations.id(inverse),))


def _role_codes(ent: np.ndarray, query: Triple) -> np.ndarray:
    codes = np.full(ent.shape, "", dtype=object)
    codes[ent == query.head] = "h"
    codes[ent == query.tail] = "t"
    return codes


def _excluded(rules, rel_names: tuple[str, ...], first: np.ndarray, last: np.ndarray, query: Triple) -> np.ndarray:
    mask = np.zeros(len(first), dtype=bool)
    start_codes = end_codes = None
    for rule in rules:
        if tuple(rule.relations) != rel_names:
            continue
        hit = np.ones(len(first), dtype=bool)
        if rule.start is not None:
            start_codes = _role_codes(first, query) if start_codes is None else start_codes
            hit &= start_codes == rule.start
        if rule.end is not None:
            end_codes = _role_codes(last, query) if end_codes is None else end_codes
            hit &= end_codes == rule.end
        mask |= hit
    return mask


# ---------------------------------------------------------------------------
# candidate pool


def _top_c(scores: np.ndarray, c: int) -> np.ndarray:
    c = min(c, len(scores))
    return np.lexsort((np.arange(len(scores)), -scores))[:c]


def select_paths(
    store: EmbeddingStore,
    graph: KnowledgeGraph,
    query: Triple,
    config,
    feature_spec: FeatureSpec | None = None,
) -> list[ScoredPath]:
    """Candidate explanatory paths for ``query``, scored with unperturbed embeddings.

    One-hop candidates: for every relation and both directions, the ``config.fanout``
    best-scoring partner entities of h and of t. Two-hop candidates: h->x->t and
    t->x->h bridges for every ordered relation pair, with x drawn from the one-hop
    partner entities. The top ``config.m`` paths per group (relation for one-hop,
    ordered relation pair for two-hop) are kept. Output is sorted by score
    descending, then path key.
    """
    feature_spec = feature_spec or FeatureSpec()
    h, t = query.head, query.tail
    n_rel = store.n_relations
    rel_names = graph.relations
    rules = feature_spec.rules(query, rel_names)
    c, m = config.fanout, config.m

    # hop-value tables: out_[a][r, e] = value of (a, r, e); in_[a][r, e] = value of (e, r, a)
    out_, in_ = {}, {}
    for a in (h, t):
        out_[a] = hop_value(squash(np.stack([tail_scores(store, a, r) for r in range(n_rel)])))
        in_[a] = hop_value(squash(np.stack([head_scores(store, r, a) for r in range(n_rel)])))

    partners: set[int] = set()
    kept: list[ScoredPath] = []
    for r in range(n_rel):
        firsts, lasts, scores = [], [], []
        for a in (h, t):
            for table, outgoing in ((out_[a], True), (in_[a], False)):
                idx = _top_c(table[r], c)
                idx = idx[idx != a]
                partners.update(int(i) for i in idx)
                firsts.append(np.full(len(idx), a) if outgoing else idx)
                lasts.append(idx if outgoing else np.full(len(idx), a))
                scores.append(table[r][idx])
        first = np.concatenate(firsts).astype(np.int64)
        last = np.concatenate(lasts).astype(np.int64)
        score = np.concatenate(scores)
        drop = (first == h) & (last == t) & (r == query.relation)
        drop |= _excluded(rules, (rel_names.name(r),), first, last, query)
        first, last, score = first[~drop], last[~drop], score[~drop]
        order = np.lexsort((last, first, -score))
        seen = set()
        for i in order:
            key = (int(first[i]), int(last[i]))
            if key in seen:
                continue
            seen.add(key)
            role = PathRole.HEAD_ONE_HOP if h in key else PathRole.TAIL_ONE_HOP
            kept.append(ScoredPath(Path(key, (r,)), role, float(score[i])))
            if len(seen) == m:
                break

    X = np.array(sorted(partners - {h, t}), dtype=np.int64)
    if len(X):
        starts = np.concatenate([np.full(len(X), h), np.full(len(X), t)])
        ends = np.concatenate([np.full(len(X), t), np.full(len(X), h)])
        mids = np.concatenate([X, X])
        for r1 in range(n_rel):
            first_hop = np.concatenate([out_[h][r1, X], out_[t][r1, X]])
            for r2 in range(n_rel):
                second_hop = np.concatenate([in_[t][r2, X], in_[h][r2, X]])
                score = 0.5 * (first_hop + second_hop)
                names = (rel_names.name(r1), rel_names.name(r2))
                keep = ~_excluded(rules, names, starts, ends, query)
                idx = np.flatnonzero(keep)
                order = idx[np.lexsort((mids[idx], starts[idx], -score[idx]))][:m]
                for i in order:
                    path = Path((int(starts[i]), int(mids[i]), int(ends[i])), (r1, r2))
                    kept.append(ScoredPath(path, PathRole.BRIDGE_TWO_HOP, float(score[i])))

    kept.sort(key=lambda sp: (-sp.score, sp.path.key()))
    return kept
