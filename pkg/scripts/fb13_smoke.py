"""FB-scale smoke run: prepare FB13 with siblings, build the benchmark, time explanations at d=400.

    python scripts/fb13_smoke.py RAW_FB13_DIR OUT_DIR [--embeddings FILE] [--queries 5]

Without --embeddings a randomly initialised d=400 store is used, which is
enough for timing since explanation cost depends only on the shapes.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from linklogic.benchmark import build_benchmark
from linklogic.cli import main as cli
from linklogic.explainer import PerturbationConfig, explain
from linklogic.kg import load_dataset_dir
from linklogic.kge import EmbeddingStore, load_embeddings


def random_store(n_entities: int, n_relations: int, dim: int) -> EmbeddingStore:
    rng = np.random.default_rng(0)
    draw = lambda n: (rng.normal(size=(n, dim)) + 1j * rng.normal(size=(n, dim))) / np.sqrt(dim)  # noqa: E731
    return EmbeddingStore(draw(n_entities), draw(n_relations))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("raw")
    parser.add_argument("out_dir")
    parser.add_argument("--embeddings")
    parser.add_argument("--queries", type=int, default=5)
    args = parser.parse_args()

    data = os.path.join(args.out_dir, "fb14")
    if cli(["prepare", data, "--raw", args.raw, "--fb14"]) != 0:
        sys.exit("prepare failed")
    manifest = json.load(open(os.path.join(data, "manifest.json"), encoding="utf-8"))
    split = load_dataset_dir(data)
    graph = split.combined()
    bench = build_benchmark(split)
    summary = bench.summary()

    if args.embeddings:
        store = load_embeddings(args.embeddings, graph.entities, graph.relations)
    else:
        store = random_store(len(graph.entities), len(graph.relations), 400)
    timings = []
    for q in bench.queries[: args.queries]:
        start = time.perf_counter()
        explain(store, graph, q, PerturbationConfig())
        timings.append(time.perf_counter() - start)

    report = {
        "counts": manifest["counts"],
        "siblings": manifest["siblings"],
        "benchmark_queries": summary["n_queries"],
        "benchmark_queries_excluding_inverse_only": summary["n_queries_excluding_inverse_only"],
        "dim": store.dim,
        "explain_seconds": timings,
    }
    print(json.dumps(report, indent=2))


if __name__ == "__main__":
    main()
