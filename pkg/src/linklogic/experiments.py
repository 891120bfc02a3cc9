"""Experiment runners: truth-category sweep, Parents relevance sweep, tautology study.

Every runner returns an :class:`ExperimentReport` whose aggregates are a pure
function of its per-query records, so a saved report can be re-checked on load.
"""

from __future__ import annotations

import csv
import dataclasses
import enum
import json
import logging
import math
import os
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from .benchmark import Benchmark, structural_siblings
from .explainer import PerturbationConfig, explain
from .heuristic import HeuristicConfig, heuristic_explain
from .kg import ConfigError, EntityType, FamilyRelations, KnowledgeGraph, Triple, parents_by_child
from .kge import EmbeddingStore, plausibility
from .metrics import ndcg_at_k, ranked_relevances
from .paths import FeatureSpec, Path, select_paths

log = logging.getLogger(__name__)


class TruthCategory(str, enum.Enum):
    TRUE = "True"
    FALSE = "False"
    NONSENSE = "Nonsense"


FAMILY_RELATIONS = frozenset({"parent", "parents", "child", "children", "spouse", "sibling"})
LOCATION_RELATIONS = frozenset({"location", "place_of_birth", "place_of_death", "nationality"})


def relation_category(name: str) -> str:
    key = name.strip().lower().replace(" ", "_")
    if key in FAMILY_RELATIONS:
        return "Family"
    if key in LOCATION_RELATIONS:
        return "Location"
    return "Other"


def query_seed(base: int, index: int) -> int:
    """Independent per-query seed derived from the run seed and the query position."""
    return int(np.random.SeedSequence([base, index]).generate_state(1)[0])


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SweepConfig:
    perturbation: PerturbationConfig = PerturbationConfig()
    thresholds: tuple[float, ...] = (0.9, 0.95)
    per_relation: int = 100
    k_values: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7)
    # the Parents sweep scores against a benchmark without the query-inverse,
    # so by default it is also withheld from the features
    exclude_query_inverse: bool = True
    gain: str = "linear"
    max_queries: int | None = None
    seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        if self.gain not in ("linear", "exponential"):
            raise ConfigError(f"unknown gain {self.gain!r}")
        if self.per_relation < 1 or self.jobs < 1:
            raise ConfigError("per_relation and jobs must be >= 1")
        if not self.k_values or min(self.k_values) < 1:
            raise ConfigError("k_values must be positive")

    @property
    def methods(self) -> list[str]:
        return ["linklogic"] + [HeuristicConfig(threshold=t).label for t in self.thresholds]

    def to_dict(self) -> dict:
        """Result-determining settings; ``jobs`` is left out since it never changes outputs."""
        out = dataclasses.asdict(self)
        del out["jobs"]
        out["thresholds"] = list(self.thresholds)
        out["k_values"] = list(self.k_values)
        return out

    @classmethod
    def from_dict(cls, values: dict) -> "SweepConfig":
        values = dict(values)
        pert = values.pop("perturbation", {})
        if isinstance(pert, dict):
            pert = PerturbationConfig(**pert)
        for key in ("thresholds", "k_values"):
            if key in values:
                values[key] = tuple(values[key])
        return cls(perturbation=pert, **values)


def _heuristic_config(method: str, perturbation: PerturbationConfig) -> HeuristicConfig:
    threshold = float(method.split("@", 1)[1])
    return HeuristicConfig(threshold=threshold, m=perturbation.m, fanout=perturbation.fanout)


# ---------------------------------------------------------------------------
# reports


def _finite(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _summary(values: Sequence[float]) -> dict:
    vals = [v for v in values if v is not None]
    if not vals:
        return {"n": 0, "mean": None, "std": None}
    arr = np.asarray(vals, dtype=np.float64)
    return {"n": len(vals), "mean": float(arr.mean()), "std": float(arr.std())}


def _compare(a: Sequence[float], b: Sequence[float]) -> dict:
    """Welch t-test and Mann-Whitney U, descriptive only."""
    a = [v for v in a if v is not None]
    b = [v for v in b if v is not None]
    if len(a) < 2 or len(b) < 2:
        return {"welch_t": None, "welch_p": None, "mannwhitney_u": None, "mannwhitney_p": None}
    t = stats.ttest_ind(a, b, equal_var=False)
    try:
        u = stats.mannwhitneyu(a, b, alternative="two-sided")
        u_stat, u_p = u.statistic, u.pvalue
    except ValueError:
        u_stat = u_p = None
    return {
        "welch_t": _finite(t.statistic),
        "welch_p": _finite(t.pvalue),
        "mannwhitney_u": _finite(u_stat),
        "mannwhitney_p": _finite(u_p),
    }


def aggregate_truth(records: list[dict]) -> dict:
    groups: dict[tuple, list[dict]] = defaultdict(list)
    for rec in records:
        groups[(rec["method"], rec["truth"])].append(rec)
        groups[(rec["method"], rec["truth"], rec["relation_category"])].append(rec)
    by_truth: dict = defaultdict(dict)
    by_category: dict = defaultdict(lambda: defaultdict(dict))
    for key in sorted(groups):
        recs = groups[key]
        entry = {
            "kge_score": _summary([r["kge_score"] for r in recs]),
            "n_paths": _summary([r["n_paths"] for r in recs]),
            "fidelity": _summary([r["fidelity"] for r in recs]),
        }
        if len(key) == 2:
            by_truth[key[0]][key[1]] = entry
        else:
            by_category[key[0]][key[2]][key[1]] = entry
    tests: dict = {}
    for method in sorted({r["method"] for r in records}):
        mine = [r for r in records if r["method"] == method]
        col = {c.value: [r for r in mine if r["truth"] == c.value] for c in TruthCategory}
        for other in ("False", "Nonsense"):
            for metric in ("kge_score", "n_paths", "fidelity"):
                tests[f"{method}|{metric}|True_vs_{other}"] = _compare(
                    [r[metric] for r in col["True"]], [r[metric] for r in col[other]]
                )
    return {
        "by_truth": {m: dict(v) for m, v in by_truth.items()},
        "by_relation_category": {m: {c: dict(x) for c, x in v.items()} for m, v in by_category.items()},
        "tests": tests,
    }


def aggregate_parents(records: list[dict]) -> dict:
    ndcg: dict = defaultdict(dict)
    n_paths: dict = defaultdict(dict)
    fidelity: dict = {}
    methods = sorted({r["method"] for r in records})
    for method in methods:
        mine = [r for r in records if r["method"] == method]
        ks = sorted({int(k) for r in mine for k in r["ndcg"]})
        for k in ks:
            ndcg[method][str(k)] = _summary([r["ndcg"][str(k)] for r in mine])
        for s in sorted({r["n_siblings"] for r in mine}):
            bucket = [r for r in mine if r["n_siblings"] == s]
            n_paths[method][str(s)] = _summary([r["n_paths"] for r in bucket])
            if method == "linklogic":
                fidelity[str(s)] = _summary([r["fidelity"] for r in bucket])
    return {
        "ndcg": dict(ndcg),
        "n_paths_by_siblings": dict(n_paths),
        "fidelity_by_siblings": fidelity,
        "zero_ideal_queries": sum(1 for r in records if r["method"] == methods[0] and r["ideal_dcg_zero"])
        if methods
        else 0,
    }


def aggregate_tautology(records: list[dict]) -> dict:
    out = {}
    for setting in sorted({r["setting"] for r in records}):
        mine = [r for r in records if r["setting"] == setting]
        n = len(mine)
        pattern_counts = Counter(p for r in mine for p in set(r["patterns"]))
        top_pattern_counts = Counter(r["patterns"][0] for r in mine if r["patterns"])
        tops = [r["coefficients"][0] for r in mine if r["coefficients"]]
        seconds = [r["coefficients"][1] for r in mine if len(r["coefficients"]) > 1]
        out[setting] = {
            "n_queries": n,
            "inverse_rank1_frequency": sum(1 for r in mine if r["inverse_rank"] == 1) / n if n else None,
            "inverse_occurrences": sum(1 for r in mine if r["inverse_rank"] is not None),
            "benchmark_path_fraction": sum(1 for r in mine if r["contains_benchmark_path"]) / n if n else None,
            "top_coefficient": _summary(tops),
            "second_coefficient": _summary(seconds),
            "top_vs_second": _compare(tops, seconds),
            "n_paths": _summary([r["n_paths"] for r in mine]),
            "fidelity": _summary([r["fidelity"] for r in mine]),
            "pattern_frequency": {p: c / n for p, c in sorted(pattern_counts.items())},
            "top_pattern_frequency": {p: c / n for p, c in sorted(top_pattern_counts.items())},
        }
    return out


AGGREGATORS: dict[str, Callable[[list[dict]], dict]] = {
    "truth": aggregate_truth,
    "parents": aggregate_parents,
    "tautology": aggregate_tautology,
}


class ReportConsistencyError(ValueError):
    pass


@dataclass
class ExperimentReport:
    kind: str
    records: list[dict]
    config: dict
    seed: int
    aggregates: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in AGGREGATORS:
            raise ConfigError(f"unknown report kind {self.kind!r}")
        if not self.aggregates:
            self.aggregates = AGGREGATORS[self.kind](self.records)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "config": self.config,
            "aggregates": self.aggregates,
            "records": self.records,
        }

    def save(self, path: str | os.PathLike) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True, allow_nan=False)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | os.PathLike) -> "ExperimentReport":
        """Read a saved report and verify that its aggregates match its records."""
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        stored = data["aggregates"]
        report = cls(data["kind"], data["records"], data["config"], data["seed"], {})
        recomputed = json.loads(json.dumps(report.aggregates, sort_keys=True))
        if recomputed != stored:
            raise ReportConsistencyError(f"{path}: aggregates do not match the per-query records")
        return report


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    def cell(v):
        if v is None:
            return "NA"
        if isinstance(v, float):
            return repr(v)
        return v

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell(v) for v in row])


# ---------------------------------------------------------------------------
# parallel map over queries


_CONTEXT: dict = {}


def _init_worker(context: dict) -> None:
    _CONTEXT.clear()
    _CONTEXT.update(context)


def _run_task(task):
    fn, args = task
    return fn(_CONTEXT, *args)


def _map_queries(fn, tasks: list[tuple], context: dict, jobs: int) -> list:
    """Apply ``fn(context, *task)`` to each task; results come back in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(context, *t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(context,)) as pool:
        return list(pool.map(_run_task, [(fn, t) for t in tasks], chunksize=max(1, len(tasks) // (4 * jobs))))


def _path_records(graph: KnowledgeGraph, ranked) -> list[dict]:
    return [{"path": p.names(graph.entities, graph.relations), "weight": w, "role": role.value} for p, w, role in ranked]


def _explain_all_methods(ctx: dict, query: Triple, seed: int, spec: FeatureSpec):
    """Run every configured method on one query sharing a single candidate pool."""
    store, graph, config = ctx["store"], ctx["graph"], ctx["config"]
    pert = dataclasses.replace(config.perturbation, seed=seed)
    pool = select_paths(store, graph, query, pert, spec)
    out = {}
    for method in config.methods:
        if method == "linklogic":
            e = explain(store, graph, query, pert, spec, pool)
            out[method] = (e.ranked_paths, e.fidelity_r2)
        else:
            h = heuristic_explain(store, graph, query, _heuristic_config(method, pert), spec, pool)
            out[method] = (h.ranked_paths, None)
    return out


# ---------------------------------------------------------------------------
# truth-category sweep


def sample_truth_queries(
    graph: KnowledgeGraph,
    entity_types: dict[int, EntityType] | None = None,
    per_relation: int = 100,
    seed: int = 0,
    relations: Sequence[int] | None = None,
) -> list[tuple[Triple, TruthCategory]]:
    """True triples per relation plus tail-corrupted False (same type) and Nonsense (any type) copies.

    Corrupted tails never form a graph triple, never equal the head, and the
    three sets are disjoint. Relations with too few triples use all of them.
    """
    types = entity_types if entity_types is not None else graph.entity_types
    rng = np.random.default_rng(seed)
    n_ent = len(graph.entities)
    type_of = np.array([types.get(e, EntityType.UNKNOWN).value for e in range(n_ent)], dtype=object)
    by_type = {t: np.flatnonzero(type_of == t) for t in set(type_of)}
    by_relation: dict[int, list[Triple]] = defaultdict(list)
    for tr in graph.triples:
        by_relation[tr.relation].append(tr)
    rel_ids = sorted(by_relation) if relations is None else list(relations)

    out: list[tuple[Triple, TruthCategory]] = []
    used: set[Triple] = set()

    def corrupt(tr: Triple, pool: np.ndarray) -> Triple | None:
        candidates = [
            int(e) for e in pool
            if e != tr.head and Triple(tr.head, tr.relation, int(e)) not in graph
            and Triple(tr.head, tr.relation, int(e)) not in used
        ]
        if not candidates:
            return None
        return Triple(tr.head, tr.relation, candidates[int(rng.integers(len(candidates)))])

    for r in rel_ids:
        triples = by_relation.get(r, [])
        if len(triples) < per_relation:
            log.warning(
                "relation %s has %d triples; using all of them", graph.relations.name(r), len(triples)
            )
            chosen = list(triples)
        else:
            chosen = [triples[i] for i in sorted(rng.choice(len(triples), per_relation, replace=False))]
        for tr in chosen:
            out.append((tr, TruthCategory.TRUE))
            used.add(tr)
        for category in (TruthCategory.FALSE, TruthCategory.NONSENSE):
            for tr in chosen:
                pool = by_type[type_of[tr.tail]] if category is TruthCategory.FALSE else np.arange(n_ent)
                fake = corrupt(tr, pool)
                if fake is None:
                    log.warning("no %s corruption available for %s", category.value, graph.triple_names(tr))
                    continue
                used.add(fake)
                out.append((fake, category))
    return out


def _truth_task(ctx: dict, index: int, query: Triple, truth: str, seed: int) -> list[dict]:
    store, graph = ctx["store"], ctx["graph"]
    results = _explain_all_methods(ctx, query, seed, FeatureSpec())
    relation = graph.relations.name(query.relation)
    base = {
        "index": index,
        "query": list(graph.triple_names(query)),
        "relation": relation,
        "relation_category": relation_category(relation),
        "truth": truth,
        "seed": seed,
        "kge_score": float(plausibility(store, *query)),
    }
    records = []
    for method, (ranked, fid) in results.items():
        records.append(
            dict(base, method=method, n_paths=len(ranked), fidelity=fid, paths=_path_records(graph, ranked))
        )
    return records


def run_truth_sweep(
    store: EmbeddingStore,
    graph: KnowledgeGraph,
    config: SweepConfig = SweepConfig(),
    queries: list[tuple[Triple, TruthCategory]] | None = None,
) -> ExperimentReport:
    if queries is None:
        queries = sample_truth_queries(graph, graph.entity_types, config.per_relation, config.seed)
    if config.max_queries is not None:
        queries = queries[: config.max_queries]
    tasks = [(i, q, c.value, query_seed(config.seed, i)) for i, (q, c) in enumerate(queries)]
    context = {"store": store, "graph": graph, "config": config}
    records = [r for batch in _map_queries(_truth_task, tasks, context, config.jobs) for r in batch]
    return ExperimentReport("truth", records, config.to_dict(), config.seed)


def write_truth_csvs(report: ExperimentReport, out_dir: str | os.PathLike) -> list[str]:
    """fig2a (KGE scores), fig2b (path counts per method), fig2c (LinkLogic fidelity)."""
    recs = report.records
    first = recs[0]["method"] if recs else None
    q = lambda r: r["query"]  # noqa: E731
    files = {
        "fig2a.csv": (
            ["index", "head", "relation", "tail", "relation_category", "truth", "kge_score"],
            [[r["index"], *q(r), r["relation_category"], r["truth"], r["kge_score"]] for r in recs if r["method"] == first],
        ),
        "fig2b.csv": (
            ["index", "head", "relation", "tail", "relation_category", "truth", "method", "n_paths"],
            [[r["index"], *q(r), r["relation_category"], r["truth"], r["method"], r["n_paths"]] for r in recs],
        ),
        "fig2c.csv": (
            ["index", "head", "relation", "tail", "relation_category", "truth", "fidelity"],
            [[r["index"], *q(r), r["relation_category"], r["truth"], r["fidelity"]] for r in recs if r["method"] == "linklogic"],
        ),
    }
    return _write_all(out_dir, files)


def _write_all(out_dir, files: dict) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, (header, rows) in files.items():
        path = os.path.join(out_dir, name)
        write_csv(path, header, rows)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Parents benchmark sweep


def _parents_task(ctx: dict, index: int, query: Triple, seed: int) -> list[dict]:
    graph, benchmark, config = ctx["graph"], ctx["benchmark"], ctx["config"]
    spec = FeatureSpec(exclude_query_inverse=config.exclude_query_inverse, family=ctx["family"])
    results = _explain_all_methods(ctx, query, seed, spec)
    ideal = benchmark.ideal_relevances(query)
    records = []
    for method, (ranked, fid) in results.items():
        rels = ranked_relevances(benchmark, query, [p for p, _, _ in ranked])
        records.append(
            {
                "index": index,
                "query": list(graph.triple_names(query)),
                "method": method,
                "seed": seed,
                "n_siblings": benchmark.sibling_counts.get(query, 0),
                "n_paths": len(ranked),
                "fidelity": fid,
                "relevances": rels,
                "ideal_dcg_zero": not any(ideal),
                "ndcg": {str(k): ndcg_at_k(rels, ideal, k, config.gain) for k in config.k_values},
                "paths": _path_records(graph, ranked),
            }
        )
    return records


def run_parents_sweep(
    store: EmbeddingStore,
    graph: KnowledgeGraph,
    benchmark: Benchmark,
    config: SweepConfig = SweepConfig(),
    family: FamilyRelations | None = None,
) -> ExperimentReport:
    queries = benchmark.queries
    if config.max_queries is not None:
        queries = queries[: config.max_queries]
    family = family or FamilyRelations.detect(graph.relations)
    tasks = [(i, q, query_seed(config.seed, i)) for i, q in enumerate(queries)]
    context = {"store": store, "graph": graph, "config": config, "benchmark": benchmark, "family": family}
    records = [r for batch in _map_queries(_parents_task, tasks, context, config.jobs) for r in batch]
    return ExperimentReport("parents", records, config.to_dict(), config.seed)


def write_parents_csvs(report: ExperimentReport, out_dir: str | os.PathLike) -> list[str]:
    """fig2d (NDCG@k per method), fig2e (path counts by siblings), fig2f (fidelity by siblings)."""
    recs = report.records
    files = {
        "fig2d.csv": (
            ["index", "head", "relation", "tail", "method", "k", "ndcg"],
            [[r["index"], *r["query"], r["method"], int(k), v] for r in recs for k, v in sorted(r["ndcg"].items(), key=lambda kv: int(kv[0]))],
        ),
        "fig2e.csv": (
            ["index", "head", "relation", "tail", "method", "n_siblings", "n_paths"],
            [[r["index"], *r["query"], r["method"], r["n_siblings"], r["n_paths"]] for r in recs],
        ),
        "fig2f.csv": (
            ["index", "head", "relation", "tail", "n_siblings", "fidelity"],
            [[r["index"], *r["query"], r["n_siblings"], r["fidelity"]] for r in recs if r["method"] == "linklogic"],
        ),
    }
    return _write_all(out_dir, files)


# ---------------------------------------------------------------------------
# tautology / child-removal / sibling-relation study


def path_pattern(path: Path, query: Triple, roles: dict[int, str], relations) -> str:
    """Abstract a path over the family roles c, p, s, p2 (anything else is x)."""
    parts = []
    for i, e in enumerate(path.entities):
        parts.append(roles.get(e, "x"))
        if i < path.length:
            parts.append(relations.name(path.relations[i]))
    return "{" + ", ".join(parts) + "}"


def family_roles(graph: KnowledgeGraph, query: Triple, family: FamilyRelations, siblings=None) -> dict[int, str]:
    siblings = siblings if siblings is not None else structural_siblings(graph, family)
    roles: dict[int, str] = {}
    parents = parents_by_child(graph, graph.relations.id(family.parent)).get(query.head, set())
    child_rel = graph.relations.get(family.child)
    if child_rel is not None:
        parents = set(parents) | {h for h, r, t in graph.triples if r == child_rel and t == query.head}
    for p2 in parents:
        roles[p2] = "p2"
    for s in siblings.get(query.head, set()):
        roles[s] = "s"
    roles[query.head] = "c"
    roles[query.tail] = "p"
    return roles


def _tautology_task(ctx: dict, setting: str, index: int, query: Triple, seed: int) -> dict:
    store, graph, benchmark, family = ctx[setting]
    config: SweepConfig = ctx["config"]
    exclude = setting != "child_true"
    spec = FeatureSpec(exclude_query_inverse=exclude, family=family)
    pert = dataclasses.replace(config.perturbation, seed=seed)
    e = explain(store, graph, query, pert, spec)
    inverse = FeatureSpec(family=family).query_inverse(query, graph.relations)
    paths = [p for p, _, _ in e.ranked_paths]
    inverse_rank = paths.index(inverse) + 1 if inverse is not None and inverse in paths else None
    roles = family_roles(graph, query, family, ctx.get(f"{setting}_siblings"))
    return {
        "setting": setting,
        "index": index,
        "query": list(graph.triple_names(query)),
        "seed": seed,
        "n_paths": e.n_paths,
        "fidelity": e.fidelity_r2,
        "inverse_rank": inverse_rank,
        "coefficients": [c for _, c, _ in e.ranked_paths],
        "patterns": [path_pattern(p, query, roles, graph.relations) for p in paths],
        "contains_benchmark_path": any(benchmark.relevance_of(query, p) > 0 for p in paths),
        "paths": _path_records(graph, e.ranked_paths),
    }


def single_sibling_queries(benchmark: Benchmark) -> list[Triple]:
    return [q for q in benchmark.queries if benchmark.sibling_counts.get(q, 0) == 1]


def run_tautology_experiment(
    store: EmbeddingStore,
    graph: KnowledgeGraph,
    benchmark: Benchmark,
    config: SweepConfig = SweepConfig(),
    fb14: tuple[EmbeddingStore, KnowledgeGraph, Benchmark] | None = None,
    family: FamilyRelations | None = None,
) -> ExperimentReport:
    """Single-sibling parent queries with the query-inverse allowed, withheld, and (optionally) on
    a graph that carries an explicit sibling relation."""
    family = family or FamilyRelations.detect(graph.relations)
    context: dict = {"config": config}
    context["child_true"] = context["child_false"] = (store, graph, benchmark, family)
    context["child_true_siblings"] = context["child_false_siblings"] = structural_siblings(graph, family)
    settings = [("child_true", benchmark), ("child_false", benchmark)]
    if fb14 is not None:
        fb_store, fb_graph, fb_bench = fb14
        fb_family = FamilyRelations.detect(fb_graph.relations)
        context["fb14_child_false"] = (fb_store, fb_graph, fb_bench, fb_family)
        context["fb14_child_false_siblings"] = structural_siblings(fb_graph, fb_family)
        settings.append(("fb14_child_false", fb_bench))
    tasks = []
    for setting, bench in settings:
        queries = single_sibling_queries(bench)
        if config.max_queries is not None:
            queries = queries[: config.max_queries]
        tasks += [(setting, i, q, query_seed(config.seed, i)) for i, q in enumerate(queries)]
    records = _map_queries(_tautology_task, tasks, context, config.jobs)
    return ExperimentReport("tautology", records, config.to_dict(), config.seed)


def write_tautology_csvs(report: ExperimentReport, out_dir: str | os.PathLike) -> list[str]:
    """fig3a: pattern frequencies for the FB13-style settings; fig3b: the sibling-relation setting."""
    agg = report.aggregates

    def rows(settings):
        out = []
        for s in settings:
            if s not in agg:
                continue
            for pattern, freq in agg[s]["pattern_frequency"].items():
                out.append([s, pattern, freq, agg[s]["top_pattern_frequency"].get(pattern, 0.0)])
        return out

    header = ["setting", "pattern", "frequency", "top_rank_frequency"]
    files = {
        "fig3a.csv": (header, rows(["child_true", "child_false"])),
        "fig3b.csv": (header, rows(["fb14_child_false"])),
    }
    return _write_all(out_dir, files)


WRITERS = {"truth": write_truth_csvs, "parents": write_parents_csvs, "tautology": write_tautology_csvs}
