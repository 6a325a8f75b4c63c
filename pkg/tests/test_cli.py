import json

import pytest

from tabledst.cli import main
from tabledst.io import read_jsonl, read_tsv
from tabledst.ops import parse_ops
from tabledst.synthetic import generate_corpus, write_layout


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    write_layout(tmp / "raw", generate_corpus(60, seed=4), "2.2")
    out = tmp / "corpus.jsonl"
    assert main(["preprocess", "--version", "2.2", "--in", str(tmp / "raw"), "--out", str(out)]) == 0
    return out


def test_track_oracle_then_eval(corpus, tmp_path, capsys):
    run, report = tmp_path / "run.jsonl", tmp_path / "report.jsonl"
    assert main(["track", "--corpus", str(corpus), "--generator", "oracle", "--out", str(run), "--workers", "2"]) == 0
    assert main(["eval", "--run", str(run), "--corpus", str(corpus), "--report", str(report)]) == 0
    meta, rows = read_jsonl(report)
    assert rows[0]["summary"]["jga"] == 1.0
    assert meta["kind"] == "report" and meta["run_meta"]["generator"] == "oracle"
    assert "JGA            1.0000" in capsys.readouterr().out


def test_outputs_carry_metadata(corpus, tmp_path):
    run = tmp_path / "run.jsonl"
    main(["track", "--corpus", str(corpus), "--generator", "noisy:drop=0.1", "--seed", "3", "--out", str(run)])
    meta, _ = read_jsonl(run)
    assert {"kind", "engine_version", "config", "seed", "generator", "deterministic"} <= set(meta)
    assert meta["seed"] == 3 and meta["deterministic"] is True


def test_track_is_deterministic(corpus, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        main(["track", "--corpus", str(corpus), "--generator", "noisy:drop=0.2,corrupt=0.1", "--seed", "5", "--out", str(out), "--workers", "3"])
    assert a.read_text() == b.read_text()


def test_extract_ops_seeds_differ_only_in_order(corpus, tmp_path):
    outs = []
    for seed in ("1", "2"):
        out = tmp_path / f"pairs{seed}.jsonl"
        assert main(["extract-ops", "--corpus", str(corpus), "--out", str(out), "--seed", seed, "--context", "last4+prev-state"]) == 0
        outs.append(read_jsonl(out)[1])
    a, b = outs
    assert [r["input"] for r in a] == [r["input"] for r in b]
    assert any(x["target"] != y["target"] for x, y in zip(a, b))
    for x, y in zip(a, b):
        assert parse_ops(x["target"]).ops.as_set() == parse_ops(y["target"]).ops.as_set()


def test_bench_writes_tsv_and_dump(corpus, tmp_path):
    out, dump = tmp_path / "bench.tsv", tmp_path / "dump.jsonl"
    assert main(["bench", "--corpus", str(corpus), "--repr", "full-cumulative", "--out", str(out), "--dump", str(dump)]) == 0
    meta, rows = read_tsv(out)
    assert meta["representation"] == "full-cumulative"
    assert {r["measure"] for r in rows} == {"input_tokens", "output_tokens", "input_chars", "output_chars"}
    assert len(read_jsonl(dump)[1]) > 0


def test_validate_passes_reconstruction(corpus, capsys):
    assert main(["validate", "--corpus", str(corpus)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["replay_failures"] == 0
    assert result["stats_match"] is False  # synthetic corpus, not the real release


def test_validate_require_stats_fails_on_synthetic(corpus, capsys):
    assert main(["validate", "--corpus", str(corpus), "--require-stats"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "validation"


def test_environment_defaults(corpus, tmp_path, monkeypatch):
    monkeypatch.setenv("TABLEDST_CORPUS", str(corpus))
    monkeypatch.setenv("TABLEDST_SEED", "11")
    out = tmp_path / "pairs.jsonl"
    assert main(["extract-ops", "--out", str(out)]) == 0
    assert read_jsonl(out)[0]["seed"] == 11
    assert main(["extract-ops", "--out", str(out), "--seed", "12"]) == 0
    assert read_jsonl(out)[0]["seed"] == 12


def test_structured_error_and_no_partial_output(tmp_path, capsys):
    out = tmp_path / "never.jsonl"
    assert main(["preprocess", "--version", "2.2", "--in", str(tmp_path / "missing"), "--out", str(out)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["command"] == "preprocess" and err["error"] == "missing-file"
    assert not out.exists()
    assert not list(tmp_path.iterdir())


def test_dataset_error_is_structured(tmp_path, capsys):
    (tmp_path / "raw").mkdir()
    (tmp_path / "raw" / "data.json").write_text("{not json")
    assert main(["preprocess", "--version", "2.1", "--in", str(tmp_path / "raw"), "--out", str(tmp_path / "c.jsonl")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "dataset" and "invalid JSON" in err["message"]


def test_eval_rejects_wrong_file_kind(corpus, tmp_path, capsys):
    assert main(["eval", "--run", str(corpus), "--corpus", str(corpus), "--report", str(tmp_path / "r.jsonl")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "contract"
