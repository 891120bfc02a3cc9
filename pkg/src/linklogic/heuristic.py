"""Path-score heuristic baseline: rank the candidate pool by path score alone."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kg import ConfigError, KnowledgeGraph, Triple
from .kge import EmbeddingStore, plausibility
from .paths import FeatureSpec, Path, PathRole, ScoredPath, select_paths


@dataclass(frozen=True)
class HeuristicConfig:
    threshold: float = 0.9
    # "per_hop": every hop's plausibility >= threshold; "path": S(P) >= -log(1 - threshold)
    threshold_mode: str = "per_hop"
    m: int = 20
    fanout: int = 50

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must lie in [0, 1]")
        if self.threshold_mode not in ("per_hop", "path"):
            raise ConfigError(f"unknown threshold_mode {self.threshold_mode!r}")
        if self.m < 1 or self.fanout < 1:
            raise ConfigError("m and fanout must be >= 1")

    @property
    def label(self) -> str:
        return f"heuristic@{self.threshold:g}"


@dataclass
class HeuristicExplanation:
    query: Triple
    ranked_paths: list[tuple[Path, float, PathRole]]
    config: HeuristicConfig = field(default_factory=HeuristicConfig)

    @property
    def n_paths(self) -> int:
        return len(self.ranked_paths)

    def to_json(self, graph: KnowledgeGraph) -> dict:
        ents, rels = graph.entities, graph.relations
        return {
            "method": "heuristic",
            "query": list(graph.triple_names(self.query)),
            "paths": [
                {"path": p.names(ents, rels), "score": s, "role": role.value}
                for p, s, role in self.ranked_paths
            ],
            "n_paths": self.n_paths,
            "threshold": self.config.threshold,
            "threshold_mode": self.config.threshold_mode,
        }


def passes_threshold(store: EmbeddingStore, sp: ScoredPath, config: HeuristicConfig) -> bool:
    if config.threshold_mode == "path":
        if config.threshold >= 1.0:
            return False
        return sp.score >= -np.log1p(-config.threshold)
    return all(plausibility(store, a, r, b) >= config.threshold for a, r, b in sp.path.hops())


def heuristic_explain(
    store: EmbeddingStore,
    graph: KnowledgeGraph,
    query: Triple,
    config: HeuristicConfig = HeuristicConfig(),
    feature_spec: FeatureSpec | None = None,
    paths: list[ScoredPath] | None = None,
) -> HeuristicExplanation:
    """Thresholded candidate paths ranked by path score (descending, ties by path key)."""
    if paths is None:
        paths = select_paths(store, graph, query, config, feature_spec)
    kept = [sp for sp in paths if passes_threshold(store, sp, config)]
    kept.sort(key=lambda sp: (-sp.score, sp.path.key()))
    return HeuristicExplanation(query, [(sp.path, sp.score, sp.role) for sp in kept], config)
