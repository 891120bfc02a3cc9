"""Knowledge graph data model, TSV ingestion, splitting and family augmentation."""

from __future__ import annotations

import enum
import json
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

logger = logging.getLogger(__name__)

SPLIT_NAMES = ("train", "valid", "test")


class ParseError(ValueError):
    """Raised for malformed triple files."""


class ConfigError(ValueError):
    """Raised for invalid user-supplied configuration."""


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class Vocabulary:
    """Bidirectional name <-> dense id table. Ids are assigned in first-seen order."""

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        idx = self._ids.get(name)
        if idx is None:
            idx = len(self._names)
            self._names.append(name)
            self._ids[name] = idx
        return idx

    def id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise KeyError(f"unknown name {name!r}") from None

    def get(self, name: str, default=None):
        return self._ids.get(name, default)

    def name(self, idx: int) -> str:
        return self._names[idx]

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def __contains__(self, name: object) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    def __iter__(self) -> Iterator[str]:
        return iter(self._names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._names == other._names

    def copy(self) -> "Vocabulary":
        return Vocabulary(self._names)


class EntityType(str, enum.Enum):
    PERSON = "Person"
    LOCATION = "Location"
    INSTITUTION = "Institution"
    PROFESSION = "Profession"
    ETHNICITY = "Ethnicity"
    CAUSE_OF_DEATH = "CauseOfDeath"
    RELIGION = "Religion"
    GENDER = "Gender"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class FamilyRelations:
    """Names of the family relations. FB13 as distributed spells them parents/children."""

    parent: str = "parent"
    child: str = "child"
    spouse: str = "spouse"
    sibling: str = "sibling"

    @classmethod
    def detect(cls, relations: Vocabulary) -> "FamilyRelations":
        parent = "parents" if "parents" in relations and "parent" not in relations else "parent"
        child = "children" if "children" in relations and "child" not in relations else "child"
        return cls(parent=parent, child=child)

    def inverse(self, relation: str) -> str | None:
        table = {
            self.parent: self.child,
            self.child: self.parent,
            self.spouse: self.spouse,
            self.sibling: self.sibling,
        }
        return table.get(relation)

    def symmetric(self) -> tuple[str, str]:
        return (self.spouse, self.sibling)


class KnowledgeGraph:
    """Immutable set of triples with per-entity outgoing/incoming indexes.

    Duplicate triples are dropped; the stored order is sorted (head, relation, tail).
    """

    def __init__(
        self,
        triples: Iterable[Sequence[int]],
        entities: Vocabulary,
        relations: Vocabulary,
        entity_types: dict[int, EntityType] | None = None,
    ):
        unique = sorted({Triple(*map(int, t)) for t in triples})
        for h, r, t in unique:
            if not (0 <= h < len(entities) and 0 <= t < len(entities)):
                raise ValueError(f"triple {(h, r, t)} references unregistered entity")
            if not 0 <= r < len(relations):
                raise ValueError(f"triple {(h, r, t)} references unregistered relation")
        self.triples: tuple[Triple, ...] = tuple(unique)
        self.entities = entities
        self.relations = relations
        self.entity_types = dict(entity_types or {})
        self._set = frozenset(self.triples)
        self.outgoing, self.incoming = build_adjacency(self.triples)

    def __len__(self) -> int:
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __contains__(self, triple: object) -> bool:
        return triple in self._set

    def array(self) -> np.ndarray:
        """Triples as an (N, 3) int64 array."""
        if not self.triples:
            return np.zeros((0, 3), dtype=np.int64)
        return np.asarray(self.triples, dtype=np.int64)

    def entity_set(self) -> set[int]:
        out = set()
        for h, _, t in self.triples:
            out.add(h)
            out.add(t)
        return out

    def with_triples(self, triples: Iterable[Sequence[int]]) -> "KnowledgeGraph":
        return KnowledgeGraph(triples, self.entities, self.relations, self.entity_types)

    def triple_names(self, triple: Triple) -> tuple[str, str, str]:
        return (
            self.entities.name(triple.head),
            self.relations.name(triple.relation),
            self.entities.name(triple.tail),
        )

    def parse_triple(self, head: str, relation: str, tail: str) -> Triple:
        return Triple(self.entities.id(head), self.relations.id(relation), self.entities.id(tail))


def build_adjacency(triples: Iterable[Triple]) -> tuple[dict[int, tuple[int, ...]], dict[int, tuple[int, ...]]]:
    """Index triples (by position) under their head (outgoing) and tail (incoming)."""
    out: dict[int, list[int]] = defaultdict(list)
    inc: dict[int, list[int]] = defaultdict(list)
    for i, (h, _, t) in enumerate(triples):
        out[h].append(i)
        inc[t].append(i)
    return ({k: tuple(v) for k, v in out.items()}, {k: tuple(v) for k, v in inc.items()})


@dataclass
class DatasetSplit:
    train: KnowledgeGraph
    valid: list[Triple]
    test: list[Triple]
    seed: int
    stats: dict = field(default_factory=dict)

    @property
    def entities(self) -> Vocabulary:
        return self.train.entities

    @property
    def relations(self) -> Vocabulary:
        return self.train.relations

    def all_triples(self) -> list[Triple]:
        return sorted(set(self.train.triples) | set(self.valid) | set(self.test))

    def combined(self) -> KnowledgeGraph:
        return self.train.with_triples(self.all_triples())

    def split_membership(self) -> dict[Triple, str]:
        """Map every triple to the split that holds it (train wins over valid over test)."""
        tags: dict[Triple, str] = {}
        for name, triples in (("test", self.test), ("valid", self.valid), ("train", self.train.triples)):
            for t in triples:
                tags[t] = name
        return tags


# ---------------------------------------------------------------------------
# ingestion


def load_triples(
    path: str | os.PathLike,
    entities: Vocabulary | None = None,
    relations: Vocabulary | None = None,
    labelled: bool = False,
) -> tuple[list[Triple], Vocabulary, Vocabulary]:
    """Read a headerless ``head<TAB>relation<TAB>tail`` file.

    Names are registered in the given vocabularies (created if missing) in
    first-seen order. Duplicate lines are dropped with a logged count.
    With ``labelled``, a fourth ``1``/``-1`` column is also accepted and only
    positive rows are kept (the layout of FB13's dev and test files).
    """
    entities = Vocabulary() if entities is None else entities
    relations = Vocabulary() if relations is None else relations
    triples: list[Triple] = []
    seen: set[Triple] = set()
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            fields = line.split("\t")
            if labelled and len(fields) == 4:
                label = fields.pop().strip()
                if label not in ("1", "-1"):
                    raise ParseError(f"{path}:{lineno}: label must be 1 or -1, got {label!r}")
                if label == "-1":
                    continue
            if len(fields) != 3 or not all(fields):
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated fields, got {len(fields)}")
            h, r, t = fields
            triple = Triple(entities.add(h), relations.add(r), entities.add(t))
            if triple in seen:
                duplicates += 1
                continue
            seen.add(triple)
            triples.append(triple)
    if duplicates:
        logger.info("dropped duplicate triples", extra={"path": str(path), "count": duplicates})
    return triples, entities, relations


def write_triples(path: str | os.PathLike, triples: Iterable[Triple], entities: Vocabulary, relations: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for h, r, t in triples:
            fh.write(f"{entities.name(h)}\t{relations.name(r)}\t{entities.name(t)}\n")


def write_names(path: str | os.PathLike, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for name in vocab:
            fh.write(name + "\n")


def read_names(path: str | os.PathLike) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        return Vocabulary(line.rstrip("\n") for line in fh if line.rstrip("\n"))


def load_dataset_dir(path: str | os.PathLike) -> DatasetSplit:
    """Load a directory written by :func:`save_dataset_dir` (or any train/valid/test.tsv trio)."""
    path = os.fspath(path)
    ent_file = os.path.join(path, "entities.txt")
    rel_file = os.path.join(path, "relations.txt")
    entities = read_names(ent_file) if os.path.exists(ent_file) else Vocabulary()
    relations = read_names(rel_file) if os.path.exists(rel_file) else Vocabulary()
    fixed = len(entities) > 0
    n_ent, n_rel = len(entities), len(relations)
    parts = {}
    for name in SPLIT_NAMES:
        f = os.path.join(path, f"{name}.tsv")
        if not os.path.exists(f):
            if name == "train":
                raise FileNotFoundError(f"missing {f}")
            parts[name] = []
            continue
        parts[name], entities, relations = load_triples(f, entities, relations)
    if fixed and (len(entities) != n_ent or len(relations) != n_rel):
        raise ParseError(f"{path}: split files mention names missing from the name tables")
    types = {}
    types_file = os.path.join(path, "entity_types.tsv")
    if os.path.exists(types_file):
        with open(types_file, encoding="utf-8") as fh:
            for line in fh:
                name, _, etype = line.rstrip("\n").rpartition("\t")
                if name in entities:
                    types[entities.id(name)] = EntityType(etype)
    seed = 0
    manifest_file = os.path.join(path, "manifest.json")
    if os.path.exists(manifest_file):
        with open(manifest_file, encoding="utf-8") as fh:
            seed = json.load(fh).get("seed", 0)
    train = KnowledgeGraph(parts["train"], entities, relations, types)
    return DatasetSplit(train, parts["valid"], parts["test"], seed)


def save_dataset_dir(path: str | os.PathLike, split: DatasetSplit, extra: dict | None = None) -> dict:
    """Write split TSVs, name tables, entity types and a JSON manifest. Returns the manifest."""
    path = os.fspath(path)
    os.makedirs(path, exist_ok=True)
    ents, rels = split.entities, split.relations
    write_triples(os.path.join(path, "train.tsv"), split.train.triples, ents, rels)
    write_triples(os.path.join(path, "valid.tsv"), split.valid, ents, rels)
    write_triples(os.path.join(path, "test.tsv"), split.test, ents, rels)
    write_names(os.path.join(path, "entities.txt"), ents)
    write_names(os.path.join(path, "relations.txt"), rels)
    types = split.train.entity_types
    with open(os.path.join(path, "entity_types.tsv"), "w", encoding="utf-8", newline="\n") as fh:
        for idx in range(len(ents)):
            fh.write(f"{ents.name(idx)}\t{types.get(idx, EntityType.UNKNOWN).value}\n")
    histogram: dict[str, int] = {}
    for idx in range(len(ents)):
        key = types.get(idx, EntityType.UNKNOWN).value
        histogram[key] = histogram.get(key, 0) + 1
    manifest = {
        "seed": split.seed,
        "counts": {"train": len(split.train), "valid": len(split.valid), "test": len(split.test)},
        "entities": len(ents),
        "relations": rels.names,
        "component_stats": split.stats.get("component", {}),
        "entity_type_histogram": dict(sorted(histogram.items())),
    }
    if extra:
        manifest.update(extra)
    with open(os.path.join(path, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# splitting and filtering


def largest_remainder_counts(total: int, proportions: Sequence[float]) -> list[int]:
    """Apportion ``total`` items by proportions; leftovers go to the largest fractional parts."""
    if abs(sum(proportions) - 1.0) > 1e-9:
        raise ConfigError(f"split proportions must sum to 1, got {sum(proportions)!r}")
    if any(p < 0 for p in proportions):
        raise ConfigError("split proportions must be non-negative")
    quotas = [total * p for p in proportions]
    counts = [int(np.floor(q)) for q in quotas]
    remainder = total - sum(counts)
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return counts


def _split_lists(items: Sequence, proportions: Sequence[float], seed: int) -> list[list]:
    counts = largest_remainder_counts(len(items), proportions)
    perm = np.random.Generator(np.random.PCG64(seed)).permutation(len(items))
    shuffled = [items[i] for i in perm]
    out, start = [], 0
    for c in counts:
        out.append(shuffled[start:start + c])
        start += c
    return out


def random_split(
    triples: Sequence[Triple],
    entities: Vocabulary,
    relations: Vocabulary,
    proportions: Sequence[float] = (0.8, 0.1, 0.1),
    seed: int = 0,
) -> DatasetSplit:
    """Shuffle triples (in sorted order first, so input order does not matter) into train/valid/test."""
    ordered = sorted(set(triples))
    train, valid, test = _split_lists(ordered, proportions, seed)
    return DatasetSplit(KnowledgeGraph(train, entities, relations), sorted(valid), sorted(test), seed)


def filter_to_largest_component(split: DatasetSplit) -> DatasetSplit:
    """Keep the largest weakly connected component of the training graph.

    Valid/test triples touching entities absent from the filtered training graph
    are dropped. Entity ids are compacted (surviving entities keep their relative order).
    """
    train = split.train
    if len(train) == 0:
        return DatasetSplit(train, [], [], split.seed, dict(split.stats))
    arr = train.array()
    n = len(train.entities)
    graph = coo_matrix((np.ones(len(arr)), (arr[:, 0], arr[:, 2])), shape=(n, n))
    _, labels = connected_components(graph, directed=True, connection="weak")
    present = np.zeros(n, dtype=bool)
    present[arr[:, 0]] = True
    present[arr[:, 2]] = True
    comp_nodes = np.bincount(labels[present], minlength=labels.max() + 1)
    comp_edges = np.bincount(labels[arr[:, 0]], minlength=labels.max() + 1)
    candidates = np.flatnonzero(comp_nodes > 0)
    # most entities, then most triples, then lowest label
    best = min(candidates, key=lambda c: (-comp_nodes[c], -comp_edges[c], c))
    keep_entity = present & (labels == best)

    old_ids = np.flatnonzero(keep_entity)
    remap = {int(o): i for i, o in enumerate(old_ids)}
    entities = Vocabulary(train.entities.name(int(o)) for o in old_ids)

    def move(triples):
        return [Triple(remap[h], r, remap[t]) for h, r, t in triples if h in remap and t in remap]

    kept_train = move(train.triples)
    types = {remap[k]: v for k, v in train.entity_types.items() if k in remap}
    new_train = KnowledgeGraph(kept_train, entities, train.relations, types)
    valid, test = sorted(move(split.valid)), sorted(move(split.test))
    stats = dict(split.stats)
    stats["component"] = {
        "n_components": int(len(candidates)),
        "kept_entities": int(len(old_ids)),
        "dropped_entities": int(present.sum() - len(old_ids)),
        "dropped_train": len(train) - len(kept_train),
        "dropped_valid": len(split.valid) - len(valid),
        "dropped_test": len(split.test) - len(test),
    }
    return DatasetSplit(new_train, valid, test, split.seed, stats)


# ---------------------------------------------------------------------------
# entity typing and siblings


def _norm(name: str) -> str:
    return name.strip().lower().replace("-", "_").replace(" ", "_")


_TAIL_RULES: tuple[tuple[frozenset[str], EntityType], ...] = (
    (frozenset({"gender"}), EntityType.GENDER),
    (frozenset({"religion"}), EntityType.RELIGION),
    (frozenset({"cause_of_death"}), EntityType.CAUSE_OF_DEATH),
    (frozenset({"ethnicity"}), EntityType.ETHNICITY),
    (frozenset({"profession"}), EntityType.PROFESSION),
    (frozenset({"institution"}), EntityType.INSTITUTION),
    (frozenset({"location", "place_of_birth", "place_of_death", "nationality"}), EntityType.LOCATION),
)
_PERSON_RELATIONS = frozenset({"parent", "parents", "child", "children", "spouse", "sibling"})


def assign_entity_types(graph: KnowledgeGraph) -> dict[int, EntityType]:
    """Heuristic single type per entity from the positions it occupies.

    Rules are checked in order and the first match wins: tail of gender,
    religion, cause_of_death, ethnicity, profession, institution, then any
    location-like relation; otherwise Person if the entity is ever a head or
    touches a family relation; otherwise Unknown.
    """
    rel_names = [_norm(n) for n in graph.relations]
    tail_rels: dict[int, set[str]] = defaultdict(set)
    is_person: set[int] = set()
    for h, r, t in graph.triples:
        name = rel_names[r]
        tail_rels[t].add(name)
        is_person.add(h)
        if name in _PERSON_RELATIONS:
            is_person.add(t)
    types: dict[int, EntityType] = {}
    for e in range(len(graph.entities)):
        found = EntityType.UNKNOWN
        seen_as_tail = tail_rels.get(e, set())
        for rels, etype in _TAIL_RULES:
            if seen_as_tail & rels:
                found = etype
                break
        else:
            if e in is_person:
                found = EntityType.PERSON
        types[e] = found
    return types


def parents_by_child(graph: KnowledgeGraph, parent_relation: int) -> dict[int, set[int]]:
    parents: dict[int, set[int]] = defaultdict(set)
    for h, r, t in graph.triples:
        if r == parent_relation:
            parents[h].add(t)
    return parents


def infer_siblings(graph: KnowledgeGraph, sibling_relation: int, family: FamilyRelations | None = None) -> list[Triple]:
    """Sibling triples for children that have exactly the same two parents.

    Both directions are emitted for each unordered pair; the output is sorted.
    """
    family = family or FamilyRelations.detect(graph.relations)
    if family.parent not in graph.relations:
        return []
    by_parents: dict[frozenset[int], list[int]] = defaultdict(list)
    for child, parents in parents_by_child(graph, graph.relations.id(family.parent)).items():
        if len(parents) == 2:
            by_parents[frozenset(parents)].append(child)
    out = []
    for children in by_parents.values():
        for a in children:
            for b in children:
                if a != b:
                    out.append(Triple(a, sibling_relation, b))
    return sorted(set(out))


def build_fb14(split: DatasetSplit, seed: int, family: FamilyRelations | None = None) -> tuple[DatasetSplit, list[Triple]]:
    """Append inferred sibling triples, split 80/10/10 with ``seed``, to each split.

    Siblings are inferred over train+valid+test combined. Returns the augmented
    split and the full list of inferred sibling triples.
    """
    family = family or FamilyRelations.detect(split.relations)
    relations = split.relations.copy()
    sib = relations.add(family.sibling)
    combined = KnowledgeGraph(split.all_triples(), split.entities, relations)
    existing = set(combined.triples)
    siblings = [t for t in infer_siblings(combined, sib, family) if t not in existing]
    add_train, add_valid, add_test = _split_lists(siblings, (0.8, 0.1, 0.1), seed)
    train = KnowledgeGraph(
        list(split.train.triples) + add_train, split.entities, relations, split.train.entity_types
    )
    stats = dict(split.stats)
    stats["siblings"] = {
        "total": len(siblings),
        "train": len(add_train),
        "valid": len(add_valid),
        "test": len(add_test),
    }
    out = DatasetSplit(train, sorted(split.valid + add_valid), sorted(split.test + add_test), split.seed, stats)
    return out, siblings
