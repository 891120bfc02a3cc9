import json

import pytest

from linklogic.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data, emb = root / "data", root / "emb.llke"
    assert main(["prepare", str(data), "--synthetic"]) == 0
    assert main(["train", str(data), str(emb), "--desk", "--hidden-dim", "8", "--max-step", "200"]) == 0
    parent_line = next(line for line in (data / "train.tsv").read_text().splitlines() if "\tparent\t" in line)
    return root, data, emb, parent_line.split("\t")


def test_prepare_and_train_outputs(workspace):
    root, data, emb, _ = workspace
    manifest = json.loads((data / "manifest.json").read_text())
    assert manifest["source"] == "synthetic"
    for suffix in (".json", ".loss.csv"):
        assert (root / f"emb.llke{suffix}").exists()
    # everything is training data, so there is nothing to rank
    assert not (root / "emb.llke.mrr.json").exists()


def test_explain_both_methods(workspace, tmp_path):
    _, data, emb, query = workspace
    out = tmp_path / "exp.jsonl"
    args = ["explain", str(data), str(emb), "--query", *query, "--method", "both", "--n", "100", "--out", str(out)]
    assert main(args) == 0
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert [x["method"] for x in lines] == ["linklogic", "heuristic"]
    assert lines[0]["query"] == query


def test_seed_precedence(workspace, tmp_path, monkeypatch):
    _, data, emb, query = workspace
    base = ["explain", str(data), str(emb), "--query", " ".join(query), "--n", "100"]

    def seed_used(extra):
        out = tmp_path / "s.jsonl"
        assert main(base + extra + ["--out", str(out)]) == 0
        return json.loads(out.read_text().splitlines()[0])["seed"]

    assert seed_used([]) == 0
    monkeypatch.setenv("LINKLOGIC_SEED", "17")
    assert seed_used([]) == 17
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 23, "n": 120}))
    assert seed_used(["--config", str(cfg)]) == 23
    assert seed_used(["--config", str(cfg), "--seed", "5"]) == 5
    monkeypatch.setenv("LINKLOGIC_SEED", "nope")
    assert main(base) == 3


def test_exit_codes(workspace, tmp_path):
    _, data, emb, query = workspace
    assert main(["explain", str(data), str(emb), "--query", "nobody", "parent", query[2]]) == 2
    assert main(["explain", str(data), str(tmp_path / "missing.llke"), "--query", *query]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"bogus_key": 1}))
    assert main(["explain", str(data), str(emb), "--query", *query, "--config", str(bad)]) == 3
    assert main(["explain", str(data), str(emb), "--query", *query, "--n", "3"]) == 3
    empty = tmp_path / "raw"
    empty.mkdir()
    assert main(["prepare", str(tmp_path / "out"), "--raw", str(empty)]) == 2


def test_benchmark_files(workspace, tmp_path):
    _, data, _, _ = workspace
    out = tmp_path / "bench.jsonl"
    assert main(["benchmark", str(data), str(out), "--include-query-inverse"]) == 0
    summary = json.loads((tmp_path / "bench.summary.json").read_text())
    assert summary["include_query_inverse"] and summary["n_entries"] == len(out.read_text().splitlines())
    assert (tmp_path / "bench.histogram.csv").exists()


def test_raw_prepare_with_labelled_rows(tmp_path):
    raw = tmp_path / "raw"
    raw.mkdir()
    rows = [f"a{i}\tparents\tb{i % 3}" for i in range(30)]
    (raw / "train.txt").write_text("\n".join(rows) + "\n")
    (raw / "dev.txt").write_text("a1\tparents\tb2\t1\na1\tparents\tb0\t-1\n")
    (raw / "test.txt").write_text("a2\tparents\tb0\t1\n")
    out = tmp_path / "prepared"
    assert main(["prepare", str(out), "--raw", str(raw), "--seed", "1"]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert sum(manifest["counts"].values()) <= 31
