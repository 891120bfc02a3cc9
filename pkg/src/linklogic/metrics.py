"""Ranking metrics for explanation relevance."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .benchmark import Benchmark
from .kg import Triple
from .paths import Path


def _gain(rel: np.ndarray, gain: str) -> np.ndarray:
    if gain == "linear":
        return rel
    if gain == "exponential":
        return np.power(2.0, rel) - 1.0
    raise ValueError(f"unknown gain {gain!r}")


def dcg_at_k(relevances: Sequence[float], k: int, gain: str = "linear") -> float:
    rel = np.asarray(list(relevances)[:k], dtype=np.float64)
    if rel.size == 0:
        return 0.0
    discounts = np.log2(np.arange(2, rel.size + 2))
    return float(np.sum(_gain(rel, gain) / discounts))


def ndcg_at_k(
    ranked_relevances: Sequence[float],
    ideal_relevances: Sequence[float],
    k: int,
    gain: str = "linear",
) -> float:
    """DCG@k of the ranking divided by DCG@k of the ideal relevances sorted descending.

    Returns 0 when the ideal DCG is 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ideal = dcg_at_k(sorted(ideal_relevances, reverse=True), k, gain)
    if ideal == 0.0:
        return 0.0
    return dcg_at_k(ranked_relevances, k, gain) / ideal


def ranked_relevances(benchmark: Benchmark, query: Triple, paths: Sequence[Path]) -> list[float]:
    """Benchmark confidence of each ranked path; repeats of an equivalent path score 0."""
    seen, out = set(), []
    for p in paths:
        key = benchmark.index.key(p)
        if key in seen:
            out.append(0.0)
            continue
        seen.add(key)
        out.append(benchmark.relevance_of(query, p))
    return out


def query_ndcg(benchmark: Benchmark, query: Triple, paths: Sequence[Path], k: int, gain: str = "linear") -> float:
    return ndcg_at_k(ranked_relevances(benchmark, query, paths), benchmark.ideal_relevances(query), k, gain)
