import numpy as np
import pytest

from linklogic.kg import EntityType, KnowledgeGraph, Triple, Vocabulary
from linklogic.kge import EmbeddingStore, train
from linklogic.synthetic import DESK_TRAINING, family_corpus

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def record_criterion():
    """Record a one-line PASS/FAIL (or SKIP when ``ok`` is None) verdict for the terminal summary."""

    def record(number: int, ok: bool | None, detail: str) -> None:
        verdict = "SKIP" if ok is None else "PASS" if ok else "FAIL"
        line = f"{verdict} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


@pytest.fixture(scope="session")
def corpus() -> KnowledgeGraph:
    return family_corpus()


@pytest.fixture(scope="session")
def desk_store(corpus) -> EmbeddingStore:
    return train(corpus, DESK_TRAINING)


def random_store(n_entities: int, n_relations: int, dim: int, seed: int) -> EmbeddingStore:
    rng = np.random.default_rng(seed)

    def draw(n):
        return rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))

    return EmbeddingStore(draw(n_entities), draw(n_relations))


@pytest.fixture
def mozart() -> KnowledgeGraph:
    """The Mozart family: Maria and Wolfgang, children of Leopold and Anna."""
    ents = Vocabulary(["Maria", "Wolfgang", "Leopold", "Anna", "Salzburg"])
    rels = Vocabulary(["parent", "child", "spouse", "sibling", "location"])
    M, W, L, A, S = range(5)
    P, C, SP, SIB, LOC = range(5)
    triples = [
        (M, P, L), (M, P, A), (W, P, L), (W, P, A),
        (L, C, M), (A, C, M), (L, C, W), (A, C, W),
        (L, SP, A), (A, SP, L),
        (M, SIB, W), (W, SIB, M),
        (L, LOC, S),
    ]
    types = {e: EntityType.PERSON for e in range(4)}
    types[S] = EntityType.LOCATION
    return KnowledgeGraph([Triple(*t) for t in triples], ents, rels, types)
