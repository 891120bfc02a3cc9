"""End-to-end desk run on the synthetic family corpus.

Prepares the corpus (with and without an explicit sibling relation), trains
embeddings for both, builds the Parents benchmark and runs every sweep.
Everything lands under OUT_DIR (default: runs/desk).

    python scripts/desk_experiments.py [OUT_DIR] [--jobs N] [--seed S]
"""

import argparse
import os
import sys
import time

from linklogic.cli import main as cli


def step(*args: str) -> None:
    start = time.perf_counter()
    code = cli(list(args))
    if code != 0:
        sys.exit(f"step failed ({code}): linklogic {' '.join(args)}")
    print(f"[{time.perf_counter() - start:6.1f} s] linklogic {' '.join(args)}", file=sys.stderr)


def run(out: str, jobs: int, seed: int) -> None:
    data, data14 = os.path.join(out, "data"), os.path.join(out, "data_fb14")
    emb, emb14 = os.path.join(out, "emb.llke"), os.path.join(out, "emb_fb14.llke")
    common = ["--seed", str(seed)]
    step("prepare", data, "--synthetic", *common)
    step("prepare", data14, "--synthetic", "--fb14", *common)
    step("train", data, emb, "--desk", *common, "--export-relations", os.path.join(out, "relations.csv"))
    step("train", data14, emb14, "--desk", *common)
    step("benchmark", data, os.path.join(out, "parents_benchmark.jsonl"))
    step("benchmark", data14, os.path.join(out, "parents_benchmark_fb14.jsonl"))
    sweep = ["--jobs", str(jobs), *common]
    step("sweep", "truth", data, emb, os.path.join(out, "truth"), *sweep)
    step("sweep", "parents", data, emb, os.path.join(out, "parents"), *sweep)
    step(
        "sweep", "tautology", data, emb, os.path.join(out, "tautology"), *sweep,
        "--fb14-data", data14, "--fb14-embeddings", emb14,
    )


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("out_dir", nargs="?", default=os.path.join("runs", "desk"))
    parser.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    run(args.out_dir, args.jobs, args.seed)
