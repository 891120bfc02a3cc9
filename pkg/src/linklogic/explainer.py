"""Perturbation-based local surrogate explanations for link predictions."""

from __future__ import annotations

import csv
import dataclasses
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .kg import ConfigError, KnowledgeGraph, Triple
from .kge import EmbeddingStore, squash, top_k_heads, top_k_tails
from .lasso import fit_nonneg_lasso
from .paths import FeatureSpec, Path, PathRole, ScoredPath, hop_value, select_paths


@dataclass(frozen=True)
class PerturbationConfig:
    alpha: float = 1.0
    n: int = 1000
    k: int = 3
    m: int = 20
    lam: float = 0.2
    holdout_fraction: float = 0.2
    fanout: int = 50
    # "per_sample": lam is a per-row penalty, i.e. the summed objective uses 2 * n_fit * lam;
    # "sum": lam enters the summed squared-error objective unscaled
    penalty_scale: str = "per_sample"
    seed: int = 0

    def __post_init__(self):
        if self.penalty_scale not in ("per_sample", "sum"):
            raise ConfigError(f"unknown penalty_scale {self.penalty_scale!r}")
        if self.n < 10:
            raise ConfigError("n must be >= 10")
        if self.k < 1 or self.m < 1 or self.fanout < 1:
            raise ConfigError("k, m and fanout must be >= 1")
        if self.lam < 0 or self.alpha < 0:
            raise ConfigError("lam and alpha must be non-negative")
        if not 0 < self.holdout_fraction < 0.5:
            raise ConfigError("holdout_fraction must lie in (0, 0.5)")


@dataclass
class PerturbedQueries:
    heads: np.ndarray  # (n, d) complex
    tails: np.ndarray  # (n, d) complex

    def __len__(self) -> int:
        return len(self.heads)


@dataclass
class Explanation:
    query: Triple
    ranked_paths: list[tuple[Path, float, PathRole]]
    fidelity_r2: float
    n_paths: int
    diagnostics: dict = field(default_factory=dict)
    config: PerturbationConfig | None = None
    holdout: tuple[np.ndarray, np.ndarray] | None = None

    def to_json(self, graph: KnowledgeGraph) -> dict:
        ents, rels = graph.entities, graph.relations
        return {
            "method": "linklogic",
            "query": list(graph.triple_names(self.query)),
            "paths": [
                {"path": p.names(ents, rels), "coefficient": coef, "role": role.value}
                for p, coef, role in self.ranked_paths
            ],
            "fidelity_r2": self.fidelity_r2,
            "n_paths": self.n_paths,
            "diagnostics": self.diagnostics,
            "config": dataclasses.asdict(self.config) if self.config else None,
            "seed": self.config.seed if self.config else None,
        }

    def write_scatter_csv(self, path: str | os.PathLike) -> None:
        """Holdout (y_true, y_pred) pairs."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["y_true", "y_pred"])
            if self.holdout is not None:
                for a, b in zip(*self.holdout):
                    writer.writerow([repr(float(a)), repr(float(b))])


def _rms_distance(center: np.ndarray, neighbors: np.ndarray) -> float:
    """RMS over all real components (real and imaginary parts) of neighbor - center."""
    diff = neighbors - center
    sq = diff.real**2 + diff.imag**2
    return float(np.sqrt(sq.sum() / (2 * center.shape[-1] * len(neighbors))))


def head_neighbors(store: EmbeddingStore, query: Triple, k: int) -> list[int]:
    """k^2 neighbours of h: best heads of (?, r, e) for each of the k best tails e of (h, r, ?)."""
    out = []
    for e, _ in top_k_tails(store, query.head, query.relation, k):
        out.extend(x for x, _ in top_k_heads(store, query.relation, e, k))
    return out


def tail_neighbors(store: EmbeddingStore, query: Triple, k: int) -> list[int]:
    """Mirror of :func:`head_neighbors`: best tails of (e, r, ?) for the k best heads e of (?, r, t)."""
    out = []
    for e, _ in top_k_heads(store, query.relation, query.tail, k):
        out.extend(x for x, _ in top_k_tails(store, e, query.relation, k))
    return out


def compute_sigmas(store: EmbeddingStore, query: Triple, k: int) -> tuple[float, float]:
    """Noise scales for head and tail from the spread of their k^2 neighbours."""
    h_nb = head_neighbors(store, query, k)
    t_nb = tail_neighbors(store, query, k)
    sigma_h = _rms_distance(store.entities[query.head], store.entities[h_nb])
    sigma_t = _rms_distance(store.entities[query.tail], store.entities[t_nb])
    return sigma_h, sigma_t


def perturb_queries(
    store: EmbeddingStore,
    query: Triple,
    sigma_h: float,
    sigma_t: float,
    alpha: float,
    n: int,
    seed=0,
) -> PerturbedQueries:
    """Gaussian jitter of h and t, independent on every real and imaginary component."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = store.dim

    def jitter(vec, sigma):
        noise = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
        return vec[None, :] + (alpha * sigma) * noise

    return PerturbedQueries(jitter(store.entities[query.head], sigma_h), jitter(store.entities[query.tail], sigma_t))


def _hop_scores(store: EmbeddingStore, hops, query: Triple, perturbed: PerturbedQueries) -> np.ndarray:
    """Raw scores (n, len(hops)) of hops with h/t replaced by their perturbed vectors."""
    n = len(perturbed)
    sub = {query.head: perturbed.heads, query.tail: perturbed.tails}
    out = np.empty((n, len(hops)))
    by_left: dict[int, list[int]] = {}
    by_right: dict[int, list[int]] = {}
    for j, (a, r, b) in enumerate(hops):
        if a in sub and b in sub:
            P, Q = sub[a], sub[b]
            out[:, j] = ((P * store.relations[r]) * np.conj(Q)).real.sum(axis=1)
        elif a in sub:
            by_left.setdefault(a, []).append(j)
        elif b in sub:
            by_right.setdefault(b, []).append(j)
        else:
            out[:, j] = float(np.real(np.sum(store.entities[a] * store.relations[r] * np.conj(store.entities[b]))))
    for a, cols in by_left.items():
        P = sub[a]
        w = np.stack([store.relations[hops[j][1]] * np.conj(store.entities[hops[j][2]]) for j in cols], axis=1)
        out[:, cols] = P.real @ w.real - P.imag @ w.imag
    for b, cols in by_right.items():
        P = sub[b]
        v = np.stack([store.entities[hops[j][0]] * store.relations[hops[j][1]] for j in cols], axis=1)
        out[:, cols] = P.real @ v.real + P.imag @ v.imag
    return out


def compute_features(
    store: EmbeddingStore,
    query: Triple,
    perturbed: PerturbedQueries,
    paths: Sequence[Path | ScoredPath],
) -> np.ndarray:
    """(n, len(paths)) matrix of path scores under each perturbed query.

    Only occurrences of h and t are replaced; interior entities and relations are fixed.
    """
    paths = [p.path if isinstance(p, ScoredPath) else p for p in paths]
    hops, owner = [], []
    for j, p in enumerate(paths):
        for hop in p.hops():
            hops.append(hop)
            owner.append(j)
    X = np.zeros((len(perturbed), len(paths)))
    if not hops:
        return X
    values = hop_value(squash(_hop_scores(store, hops, query, perturbed)))
    lengths = np.array([p.length for p in paths], dtype=np.float64)
    np.add.at(X.T, np.asarray(owner), values.T)
    return X / lengths


def compute_labels(store: EmbeddingStore, query: Triple, perturbed: PerturbedQueries) -> np.ndarray:
    """-log(1 - f(h_i, r, t_i)) for every perturbed query."""
    hop = [(query.head, query.relation, query.tail)]
    return hop_value(squash(_hop_scores(store, hop, query, perturbed)))[:, 0]


def fidelity_r2(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """Coefficient of determination about the mean of ``y_true``; 0 when it is constant."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        return 0.0
    return 1.0 - float(np.sum((y_true - y_pred) ** 2)) / ss_tot


def explain(
    store: EmbeddingStore,
    graph: KnowledgeGraph,
    query: Triple,
    config: PerturbationConfig = PerturbationConfig(),
    feature_spec: FeatureSpec | None = None,
    paths: list[ScoredPath] | None = None,
) -> Explanation:
    """Explain the score of ``query`` with a non-negative sparse surrogate over path features.

    ``paths`` may be given to reuse a precomputed candidate pool.
    """
    perturb_seed, split_seed = np.random.SeedSequence(config.seed).spawn(2)
    sigma_h, sigma_t = compute_sigmas(store, query, config.k)
    perturbed = perturb_queries(
        store, query, sigma_h, sigma_t, config.alpha, config.n, np.random.default_rng(perturb_seed)
    )
    if paths is None:
        paths = select_paths(store, graph, query, config, feature_spec)
    diagnostics = {
        "sigma_h": sigma_h,
        "sigma_t": sigma_t,
        "degenerate_sigma": sigma_h == 0.0 and sigma_t == 0.0,
        "m_effective": len(paths),
    }
    if not paths:
        diagnostics.update(n_fit=0, n_holdout=0, train_r2=0.0, constant_labels=False)
        return Explanation(query, [], 0.0, 0, diagnostics, config)

    X = compute_features(store, query, perturbed, paths)
    y = compute_labels(store, query, perturbed)
    perm = np.random.default_rng(split_seed).permutation(config.n)
    n_hold = max(1, int(round(config.holdout_fraction * config.n)))
    hold, fit_rows = np.sort(perm[:n_hold]), np.sort(perm[n_hold:])

    penalty = config.lam * (2 * len(fit_rows) if config.penalty_scale == "per_sample" else 1)
    fit = fit_nonneg_lasso(X[fit_rows], y[fit_rows], penalty)
    y_hold_pred = fit.predict(X[hold])
    r2 = fidelity_r2(y[hold], y_hold_pred)
    diagnostics.update(
        n_fit=int(len(fit_rows)),
        n_holdout=int(len(hold)),
        train_r2=fidelity_r2(y[fit_rows], fit.predict(X[fit_rows])),
        constant_labels=bool(np.ptp(y[hold]) == 0.0),
        lasso_sweeps=fit.sweeps,
        lasso_converged=fit.converged,
        intercept=fit.intercept,
    )
    ranked = [(sp.path, float(c), sp.role) for sp, c in zip(paths, fit.coef) if c > 0]
    ranked.sort(key=lambda item: (-item[1], item[0].key()))
    return Explanation(query, ranked, r2, len(ranked), diagnostics, config, (y[hold], y_hold_pred))
