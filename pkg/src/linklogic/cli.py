"""Command-line entry point: prepare, train, benchmark, explain, sweep.

Exit codes: 0 success, 1 runtime failure, 2 bad input (unknown names, unreadable
or malformed files), 3 configuration error. Logs go to stderr as JSON lines.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import time
from typing import Sequence

from . import __version__
from .benchmark import build_benchmark, write_benchmark
from .experiments import (
    WRITERS,
    SweepConfig,
    run_parents_sweep,
    run_truth_sweep,
    run_tautology_experiment,
)
from .explainer import PerturbationConfig, explain
from .heuristic import HeuristicConfig, heuristic_explain
from .kg import (
    ConfigError,
    DatasetSplit,
    KnowledgeGraph,
    ParseError,
    Triple,
    Vocabulary,
    assign_entity_types,
    build_fb14,
    filter_to_largest_component,
    load_dataset_dir,
    load_triples,
    random_split,
    save_dataset_dir,
)
from .kge import EmbeddingFormatError, TrainingConfig, evaluate_mrr, load_embeddings, save_embeddings, train
from .paths import FeatureSpec, select_paths
from .synthetic import DESK_TRAINING, CorpusConfig, family_corpus

log = logging.getLogger("linklogic")

EXIT_OK, EXIT_RUNTIME, EXIT_INPUT, EXIT_CONFIG = 0, 1, 2, 3


class InputError(Exception):
    """Bad user input: unknown names, missing or malformed files."""


# ---------------------------------------------------------------------------
# logging


_STANDARD_ATTRS = set(vars(logging.makeLogRecord({}))) | {"message", "asctime"}


class JsonLineFormatter(logging.Formatter):
    def format(self, record: logging.LogRecord) -> str:
        payload = {
            "time": round(record.created, 3),
            "level": record.levelname.lower(),
            "logger": record.name,
            "msg": record.getMessage(),
        }
        for key, value in vars(record).items():
            if key not in _STANDARD_ATTRS and not key.startswith("_"):
                payload[key] = value
        return json.dumps(payload, sort_keys=True, default=str)


def _setup_logging(level: str) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(JsonLineFormatter())
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(level.upper())


# ---------------------------------------------------------------------------
# config resolution: flag > file > environment (seed only) > default


def _read_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat JSON object")
    return data


def _env_seed() -> int | None:
    raw = os.environ.get("LINKLOGIC_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"LINKLOGIC_SEED must be an integer, got {raw!r}") from exc


def _overrides(args: argparse.Namespace, names: Sequence[str]) -> dict:
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def _split_keys(values: dict, groups: dict[str, set[str]]) -> dict[str, dict]:
    out = {g: {} for g in groups}
    for key, value in values.items():
        for g, keys in groups.items():
            if key in keys:
                out[g][key] = value
                break
        else:
            raise ConfigError(f"unknown config key {key!r}")
    return out


PERTURBATION_KEYS = {f.name for f in dataclasses.fields(PerturbationConfig)}
HEURISTIC_KEYS = {"threshold", "threshold_mode"}
SWEEP_KEYS = {f.name for f in dataclasses.fields(SweepConfig)} - {"perturbation", "seed"}


def _resolve_seed(args, file_values: dict) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if "seed" in file_values:
        return int(file_values["seed"])
    env = _env_seed()
    return env if env is not None else 0


def _resolve_explainer_configs(args, with_sweep: bool = False):
    file_values = _read_config_file(args.config)
    merged = dict(file_values)
    flag_keys = PERTURBATION_KEYS | HEURISTIC_KEYS | (SWEEP_KEYS if with_sweep else set())
    merged.update(_overrides(args, sorted(flag_keys)))
    merged["seed"] = _resolve_seed(args, file_values)
    groups = {"perturbation": PERTURBATION_KEYS, "heuristic": HEURISTIC_KEYS}
    if with_sweep:
        groups["sweep"] = SWEEP_KEYS
    parts = _split_keys(merged, groups)
    try:
        perturbation = PerturbationConfig(**parts["perturbation"])
        h = parts["heuristic"]
        heuristic = HeuristicConfig(m=perturbation.m, fanout=perturbation.fanout, **h)
        sweep = None
        if with_sweep:
            sw = dict(parts["sweep"])
            for key in ("thresholds", "k_values"):
                if key in sw:
                    sw[key] = tuple(sw[key])
            if "jobs" not in sw:
                sw["jobs"] = os.cpu_count() or 1
            sweep = SweepConfig(perturbation=perturbation, seed=perturbation.seed, **sw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return perturbation, heuristic, sweep


def _write_json(path: str, payload) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# data helpers


def _load_data(path: str) -> DatasetSplit:
    if not os.path.isdir(path):
        raise InputError(f"data directory not found: {path}")
    try:
        return load_dataset_dir(path)
    except FileNotFoundError as exc:
        raise InputError(str(exc)) from exc


def _load_store(path: str, graph: KnowledgeGraph):
    if not os.path.exists(path):
        raise InputError(f"embedding file not found: {path}")
    return load_embeddings(path, graph.entities, graph.relations)


def _find(raw_dir: str, stems: Sequence[str]) -> str | None:
    for stem in stems:
        for ext in (".txt", ".tsv"):
            candidate = os.path.join(raw_dir, stem + ext)
            if os.path.exists(candidate):
                return candidate
    return None


def _parse_query(tokens: Sequence[str], graph: KnowledgeGraph) -> Triple:
    if len(tokens) == 1:
        text = tokens[0]
        tokens = text.split("\t") if "\t" in text else text.split()
    if len(tokens) != 3:
        raise InputError(f"query must be 'head relation tail', got {' '.join(tokens)!r}")
    head, relation, tail = tokens
    for name, vocab, kind in ((head, graph.entities, "entity"), (relation, graph.relations, "relation"), (tail, graph.entities, "entity")):
        if name not in vocab:
            raise InputError(f"unknown {kind} {name!r}")
    return graph.parse_triple(head, relation, tail)


# ---------------------------------------------------------------------------
# subcommands


def cmd_prepare(args) -> int:
    seed = _resolve_seed(args, {})
    proportions = tuple(float(x) for x in args.proportions.split(",")) if args.proportions else None
    if args.synthetic:
        graph = family_corpus(CorpusConfig(seed=seed))
        split = random_split(graph.triples, graph.entities, graph.relations, proportions or (1.0, 0.0, 0.0), seed)
        split.train.entity_types.update(graph.entity_types)
        source = "synthetic"
    else:
        raw = args.raw
        if not os.path.isdir(raw):
            raise InputError(f"raw directory not found: {raw}")
        files = [_find(raw, ("train",)), _find(raw, ("valid", "dev")), _find(raw, ("test",))]
        if not any(files):
            raise InputError(f"{raw}: no train/valid|dev/test .txt or .tsv files")
        triples: list[Triple] = []
        entities, relations = Vocabulary(), Vocabulary()
        for f in files:
            if f is None:
                continue
            part, entities, relations = load_triples(f, entities, relations, labelled=True)
            log.info("read raw triples", extra={"path": f, "count": len(part)})
            triples += part
        if not triples:
            raise InputError(f"{raw}: raw files contain no triples")
        split = random_split(triples, entities, relations, proportions or (0.8, 0.1, 0.1), seed)
        split = filter_to_largest_component(split)
        types = assign_entity_types(split.combined())
        split.train.entity_types.update(types)
        source = os.path.basename(os.path.abspath(raw))
    extra = {"source": source}
    if args.fb14:
        split, siblings = build_fb14(split, seed)
        log.info("inferred sibling triples", extra={"count": len(siblings), **split.stats["siblings"]})
        extra["siblings"] = split.stats["siblings"]
    try:
        manifest = save_dataset_dir(args.out_dir, split, extra)
    except OSError as exc:
        raise InputError(f"cannot write {args.out_dir}: {exc}") from exc
    log.info("prepared dataset", extra={"out_dir": args.out_dir, "counts": manifest["counts"]})
    return EXIT_OK


TRAIN_FLAGS = (
    "hidden_dim",
    "batch_size",
    "neg_sample_size",
    "learning_rate",
    "max_step",
    "adversarial_sampling",
    "adversarial_temperature",
    "regularization_coef",
    "log_every",
)


def cmd_train(args) -> int:
    split = _load_data(args.data)
    file_values = _read_config_file(args.config)
    base = dataclasses.asdict(DESK_TRAINING) if args.desk else {}
    values = {**base, **file_values}
    try:
        config = TrainingConfig.from_mapping({**values, **_overrides(args, TRAIN_FLAGS), "seed": _resolve_seed(args, file_values)})
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    log.info("training", extra={"config": dataclasses.asdict(config), "triples": len(split.train)})
    curve: list[tuple[int, float]] = []

    def record(step, loss):
        curve.append((step, float(loss)))
        if step % (config.log_every * 10) == 0:
            log.info("train step", extra={"step": step, "loss": float(loss)})

    start = time.perf_counter()
    store = train(split.train, config, len(split.entities), len(split.relations), callback=record)
    log.info("training finished", extra={"seconds": round(time.perf_counter() - start, 2)})
    out = args.out
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    save_embeddings(store, out, config, split.entities, split.relations)
    with open(out + ".loss.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "loss"])
        writer.writerows([s, repr(l)] for s, l in curve)
    eval_set = split.test or split.valid
    if eval_set:
        mrr = evaluate_mrr(store, eval_set, split.combined())
        rels = split.relations
        report = {
            "evaluated_on": "test" if split.test else "valid",
            "overall": mrr["overall"],
            "per_relation": {rels.name(r): v for r, v in mrr["per_relation"].items()},
            "counts": {rels.name(r): c for r, c in mrr["counts"].items()},
        }
        _write_json(out + ".mrr.json", report)
        log.info("filtered MRR", extra={"overall": mrr["overall"], "on": report["evaluated_on"]})
    if args.export_relations:
        with open(args.export_relations, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["relation", "component", "real", "imag"])
            for r, name in enumerate(split.relations):
                for i, z in enumerate(store.relations[r]):
                    writer.writerow([name, i, repr(float(z.real)), repr(float(z.imag))])
    return EXIT_OK


def cmd_benchmark(args) -> int:
    split = _load_data(args.data)
    try:
        bench = build_benchmark(split, include_query_inverse=args.include_query_inverse)
    except ConfigError as exc:
        raise InputError(str(exc)) from exc
    if not bench.by_query:
        raise InputError("no parent triples produced benchmark entries")
    graph = split.combined()
    summary = write_benchmark(bench, graph, args.out)
    stem = args.out[: -len(".jsonl")] if args.out.endswith(".jsonl") else args.out
    with open(stem + ".histogram.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["entries_per_query", "n_queries"])
        for k, v in summary["entries_per_query_histogram"].items():
            writer.writerow([k, v])
    log.info(
        "benchmark written",
        extra={"queries": summary["n_queries"], "queries_excluding_inverse_only": summary["n_queries_excluding_inverse_only"]},
    )
    return EXIT_OK


def cmd_explain(args) -> int:
    split = _load_data(args.data)
    graph = split.combined()
    store = _load_store(args.embeddings, graph)
    query = _parse_query(args.query, graph)
    perturbation, heuristic, _ = _resolve_explainer_configs(args)
    spec = FeatureSpec(exclude_query_inverse=args.exclude_query_inverse)
    start = time.perf_counter()
    pool = select_paths(store, graph, query, perturbation, spec)
    blocks = []
    if args.method in ("linklogic", "both"):
        e = explain(store, graph, query, perturbation, spec, pool)
        blocks.append(e.to_json(graph))
        if args.scatter:
            e.write_scatter_csv(args.scatter)
    if args.method in ("heuristic", "both"):
        blocks.append(heuristic_explain(store, graph, query, heuristic, spec, pool).to_json(graph))
    log.info("explained", extra={"query": list(graph.triple_names(query)), "seconds": round(time.perf_counter() - start, 3)})
    text = "".join(json.dumps(b, sort_keys=True, allow_nan=False) + "\n" for b in blocks)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sweep(args) -> int:
    split = _load_data(args.data)
    graph = split.combined()
    store = _load_store(args.embeddings, graph)
    _, _, config = _resolve_explainer_configs(args, with_sweep=True)
    if args.kind != "parents" and args.exclude_query_inverse is not None:
        log.warning("--exclude-query-inverse only affects the parents sweep")
    start = time.perf_counter()
    if args.kind == "truth":
        report = run_truth_sweep(store, graph, config)
    elif args.kind == "parents":
        bench = build_benchmark(split, include_query_inverse=not config.exclude_query_inverse)
        report = run_parents_sweep(store, graph, bench, config)
    else:
        bench = build_benchmark(split, include_query_inverse=True)
        fb14 = None
        if args.fb14_data or args.fb14_embeddings:
            if not (args.fb14_data and args.fb14_embeddings):
                raise ConfigError("--fb14-data and --fb14-embeddings must be given together")
            fb_split = _load_data(args.fb14_data)
            fb_graph = fb_split.combined()
            fb14 = (_load_store(args.fb14_embeddings, fb_graph), fb_graph, build_benchmark(fb_split))
        report = run_tautology_experiment(store, graph, bench, config, fb14)
    os.makedirs(args.out_dir, exist_ok=True)
    report.save(os.path.join(args.out_dir, f"{args.kind}_report.json"))
    _write_json(os.path.join(args.out_dir, f"{args.kind}_config.json"), config.to_dict())
    written = WRITERS[args.kind](report, args.out_dir)
    log.info(
        "sweep finished",
        extra={"kind": args.kind, "records": len(report.records), "files": written, "seconds": round(time.perf_counter() - start, 2)},
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _bool_flag(parser, name: str, help_text: str) -> None:
    parser.add_argument(f"--{name}", dest=name.replace("-", "_"), action=argparse.BooleanOptionalAction, default=None, help=help_text)


def _add_explainer_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("explainer")
    g.add_argument("--config", help="flat JSON file of parameters (flags take precedence)")
    g.add_argument("--alpha", type=float, help="perturbation scale multiplier")
    g.add_argument("--n", type=int, help="number of perturbed queries")
    g.add_argument("--k", type=int, help="neighbourhood size for the noise scale")
    g.add_argument("--m", type=int, help="paths kept per relation group")
    g.add_argument("--lam", type=float, help="Lasso penalty")
    g.add_argument("--fanout", type=int, help="one-hop candidates per relation and direction")
    g.add_argument("--holdout-fraction", dest="holdout_fraction", type=float, help="rows held out for fidelity")
    g.add_argument("--penalty-scale", dest="penalty_scale", choices=["per_sample", "sum"], help="how the penalty is scaled")
    g.add_argument("--threshold", type=float, help="heuristic plausibility threshold")
    g.add_argument("--threshold-mode", dest="threshold_mode", choices=["per_hop", "path"], help="heuristic threshold rule")
    g.add_argument("--seed", type=int, help="random seed (default: $LINKLOGIC_SEED or 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linklogic", description="Path-based explanations for knowledge graph link predictions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="info", choices=["debug", "info", "warning", "error"], help="stderr log level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="build train/valid/test splits, entity types and a manifest")
    p.add_argument("out_dir", help="output dataset directory")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--raw", help="directory with train and valid|dev and test files (.txt or .tsv)")
    src.add_argument("--synthetic", action="store_true", help="generate the seeded synthetic family corpus instead")
    p.add_argument("--fb14", action="store_true", help="append inferred sibling triples")
    p.add_argument("--seed", type=int, help="split seed (default: $LINKLOGIC_SEED or 0)")
    p.add_argument("--proportions", help="train,valid,test fractions (default 0.8,0.1,0.1; synthetic 1,0,0)")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train ComplEx embeddings")
    p.add_argument("data", help="dataset directory written by prepare")
    p.add_argument("out", help="embedding file to write")
    p.add_argument("--config", help="JSON hyperparameter file (DGL-KE key names accepted)")
    p.add_argument("--desk", action="store_true", help="start from the small-corpus recipe instead of the defaults")
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--neg-sample-size", dest="neg_sample_size", type=int)
    p.add_argument("--learning-rate", dest="learning_rate", type=float)
    p.add_argument("--max-step", dest="max_step", type=int)
    _bool_flag(p, "adversarial-sampling", "self-adversarial negative weighting")
    p.add_argument("--adversarial-temperature", dest="adversarial_temperature", type=float)
    p.add_argument("--regularization-coef", dest="regularization_coef", type=float)
    p.add_argument("--log-every", dest="log_every", type=int)
    p.add_argument("--seed", type=int, help="training seed (default: $LINKLOGIC_SEED or 0)")
    p.add_argument("--export-relations", dest="export_relations", help="also write relation embeddings as CSV")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("benchmark", help="build the Parents benchmark")
    p.add_argument("data", help="dataset directory")
    p.add_argument("out", help="JSON-lines output file")
    p.add_argument("--include-query-inverse", action="store_true", help="also emit the {p, child, c} entries")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("explain", help="explain one query triple")
    p.add_argument("data", help="dataset directory")
    p.add_argument("embeddings", help="embedding file")
    p.add_argument("--query", nargs="+", required=True, help="'head relation tail' (one string or three tokens)")
    p.add_argument("--method", choices=["linklogic", "heuristic", "both"], default="linklogic")
    p.add_argument("--exclude-query-inverse", action="store_true", help="withhold the inverse restatement of the query")
    p.add_argument("--out", help="write JSON lines here instead of stdout")
    p.add_argument("--scatter", help="write holdout (y_true, y_pred) pairs to this CSV")
    _add_explainer_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("sweep", help="run an experiment sweep and write report + figure CSVs")
    p.add_argument("kind", choices=["truth", "parents", "tautology"])
    p.add_argument("data", help="dataset directory")
    p.add_argument("embeddings", help="embedding file")
    p.add_argument("out_dir", help="output directory")
    _add_explainer_flags(p)
    s = p.add_argument_group("sweep")
    s.add_argument("--per-relation", dest="per_relation", type=int, help="truth sweep: true triples per relation")
    s.add_argument("--max-queries", dest="max_queries", type=int, help="cap on queries (for quick runs)")
    s.add_argument("--thresholds", type=lambda v: tuple(float(x) for x in v.split(",")), help="heuristic thresholds, comma separated")
    s.add_argument("--k-values", dest="k_values", type=lambda v: tuple(int(x) for x in v.split(",")), help="NDCG cut-offs, comma separated")
    s.add_argument("--gain", choices=["linear", "exponential"], help="NDCG gain function")
    _bool_flag(s, "exclude-query-inverse", "parents sweep: withhold the query-inverse (default on)")
    s.add_argument("--jobs", type=int, help="worker processes (default: all processors)")
    s.add_argument("--fb14-data", dest="fb14_data", help="tautology sweep: dataset with a sibling relation")
    s.add_argument("--fb14-embeddings", dest="fb14_embeddings", help="tautology sweep: embeddings for --fb14-data")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.log_level)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error", extra={"error": str(exc)})
        return EXIT_CONFIG
    except (InputError, ParseError, EmbeddingFormatError, FileNotFoundError) as exc:
        log.error("bad input", extra={"error": str(exc)})
        return EXIT_INPUT
    except Exception as exc:  # noqa: BLE001
        log.exception("runtime error", extra={"error": str(exc)})
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
