"""Seeded synthetic family corpus: couples with children plus location/profession noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kg import EntityType, KnowledgeGraph, Triple, Vocabulary
from .kge import TrainingConfig

RELATIONS = ("parent", "child", "spouse", "location", "profession")

# Small-corpus training recipe: d=32, 5000 steps. Uniform negatives and a larger
# step size keep true-fact plausibility high without saturating every edge.
DESK_TRAINING = TrainingConfig(
    hidden_dim=32,
    batch_size=256,
    neg_sample_size=256,
    learning_rate=1.0,
    max_step=5000,
    adversarial_sampling=False,
    seed=0,
)


@dataclass(frozen=True)
class CorpusConfig:
    n_families: int = 60
    max_children: int = 5
    n_singles: int = 40
    n_locations: int = 60
    n_professions: int = 30
    # probability that a child lives where its parents live
    home_location_prob: float = 0.5
    seed: int = 0


def family_corpus(config: CorpusConfig = CorpusConfig()) -> KnowledgeGraph:
    """Families get ``i % (max_children + 1)`` children, so each size appears equally often."""
    rng = np.random.default_rng(config.seed)
    entities, relations = Vocabulary(), Vocabulary(RELATIONS)
    par, chi, spo, loc, prof = (relations.id(r) for r in RELATIONS)
    locations = [entities.add(f"place_{i}") for i in range(config.n_locations)]
    professions = [entities.add(f"job_{i}") for i in range(config.n_professions)]
    types = {e: EntityType.LOCATION for e in locations}
    types.update({e: EntityType.PROFESSION for e in professions})
    triples: list[Triple] = []

    def person(name: str) -> int:
        e = entities.add(name)
        types[e] = EntityType.PERSON
        return e

    for f in range(config.n_families):
        a, b = person(f"fam{f}_parent_a"), person(f"fam{f}_parent_b")
        home = int(rng.choice(locations))
        triples += [Triple(a, spo, b), Triple(b, spo, a), Triple(a, loc, home), Triple(b, loc, home)]
        for x in (a, b):
            triples.append(Triple(x, prof, int(rng.choice(professions))))
        for j in range(f % (config.max_children + 1)):
            c = person(f"fam{f}_child_{j}")
            for p in (a, b):
                triples += [Triple(c, par, p), Triple(p, chi, c)]
            place = home if rng.random() < config.home_location_prob else int(rng.choice(locations))
            triples += [Triple(c, loc, place), Triple(c, prof, int(rng.choice(professions)))]
    for i in range(config.n_singles):
        s = person(f"single_{i}")
        triples += [Triple(s, loc, int(rng.choice(locations))), Triple(s, prof, int(rng.choice(professions)))]
    return KnowledgeGraph(triples, entities, relations, types)
