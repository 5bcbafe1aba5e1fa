import json
import subprocess
import sys

import pytest

from biotabqa.cli import main, parse_task_spec
from biotabqa.jsonl import read_jsonl
from biotabqa.synthesis import synthetic_corpus
from biotabqa.tables import save_corpus


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "tables.jsonl"
    save_corpus(synthetic_corpus(9, seed=21), path)
    return path


def test_parse_task_spec():
    assert parse_task_spec("1-22") == set(range(1, 23))
    assert parse_task_spec("1,4,7") == {1, 4, 7}
    assert parse_task_spec("1-3,9,15-16") == {1, 2, 3, 9, 15, 16}


def test_usage_errors_exit_1(capsys):
    assert main([]) == 1
    assert main(["generate"]) == 1  # missing required flags
    assert main(["frobnicate"]) == 1
    capsys.readouterr()


def test_data_errors_exit_2(tmp_path, capsys):
    assert main(["validate", "--corpus", str(tmp_path / "absent.jsonl")]) == 2
    capsys.readouterr()


def test_validate_ok(corpus_path, capsys):
    assert main(["validate", "--corpus", str(corpus_path)]) == 0
    out = capsys.readouterr().out
    assert "OK" in out


def test_validate_reports_errors(tmp_path, capsys):
    bad = tmp_path / "bad.jsonl"
    bad.write_text(
        json.dumps({"table_id": "t", "rows": [{"diagnosis": "", "symptoms": [], "signs": []}]}) + "\n",
        encoding="utf-8",
    )
    assert main(["validate", "--corpus", str(bad)]) == 2
    out = capsys.readouterr().out
    assert "EmptyDiagnosis" in out


def test_templates_export(tmp_path, capsys):
    out_path = tmp_path / "catalog.jsonl"
    assert main(["templates", "export", "--out", str(out_path)]) == 0
    records = list(read_jsonl(out_path))
    assert len(records) == 22
    assert records[0]["question_pattern"] == "I have {symptom A}, what disease do I have?"
    assert (tmp_path / "catalog.jsonl.manifest.json").exists()
    capsys.readouterr()


def test_generate_writes_outputs_and_manifest(corpus_path, tmp_path, capsys):
    out_dir = tmp_path / "data"
    code = main(
        [
            "generate", "--corpus", str(corpus_path), "--tasks", "1-22",
            "--seed", "42", "--cap", "2", "--out", str(out_dir),
        ]
    )
    assert code == 0
    records = list(read_jsonl(out_dir / "dataset.jsonl"))
    assert records
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["command"] == "generate"
    assert manifest["seeds"] == {"seed": 42}
    assert manifest["counts"]["instances"] == len(records)
    report = json.loads((out_dir / "report.json").read_text())
    assert set(report) >= {"skips", "counts"}
    capsys.readouterr()


def test_generate_deterministic_bytes(corpus_path, tmp_path, capsys):
    args = ["generate", "--corpus", str(corpus_path), "--tasks", "1,5,22", "--seed", "7", "--cap", "2"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "dataset.jsonl").read_bytes()
    b = (tmp_path / "b" / "dataset.jsonl").read_bytes()
    assert a == b
    capsys.readouterr()


def test_generate_with_instructions_and_budget(corpus_path, tmp_path, capsys):
    out_dir = tmp_path / "instr"
    code = main(
        [
            "generate", "--corpus", str(corpus_path), "--tasks", "1,2", "--seed", "1",
            "--cap", "1", "--instructions", "fixed", "--budget", "30", "--out", str(out_dir),
        ]
    )
    assert code == 0
    records = list(read_jsonl(out_dir / "dataset.jsonl"))
    assert all(rec.get("instruction", "").startswith("Prompt: ") for rec in records)
    report = json.loads((out_dir / "report.json").read_text())
    assert "overflows" in report
    assert report["overflows"], "tiny budget should flag overflowing instances"
    capsys.readouterr()


def test_split_pipeline_oracle_scores_one(corpus_path, tmp_path, capsys):
    split_dir = tmp_path / "s1"
    assert main(
        [
            "split", "--corpus", str(corpus_path), "--canonical", "1",
            "--seed", "7", "--cap", "2", "--out", str(split_dir),
        ]
    ) == 0
    manifest = json.loads((split_dir / "manifest.json").read_text())
    assert sorted(manifest["spec"]["cross_tasks"]) == [1, 4, 7, 15, 21]
    train_ids = set(manifest["partition"]["train_table_ids"])
    test_ids = set(manifest["partition"]["test_table_ids"])
    assert not train_ids & test_ids
    cross_records = list(read_jsonl(split_dir / "cross_test.jsonl"))
    assert {rec["task_id"] for rec in cross_records} <= {1, 4, 7, 15, 21}

    pred_path = tmp_path / "oracle_preds.jsonl"
    assert main(
        [
            "oracle", "batch", "--corpus", str(corpus_path),
            "--dataset", str(split_dir / "cross_test.jsonl"), "--out", str(pred_path),
        ]
    ) == 0
    assert main(
        [
            "score", "--gold", str(split_dir / "cross_test.jsonl"), "--pred", str(pred_path),
            "--canonical", "1", "--format", "records", "--out", str(tmp_path / "report.jsonl"),
        ]
    ) == 0
    rows = list(read_jsonl(tmp_path / "report.jsonl"))
    task_rows = [r for r in rows if r["row"] == "task"]
    assert task_rows and all(r["em"] == 1.0 for r in task_rows)
    overall = [r for r in rows if r["row"] == "overall"]
    assert overall[0]["em"] == 1.0
    capsys.readouterr()


def test_split_rerun_byte_identical(corpus_path, tmp_path, capsys):
    args = ["split", "--corpus", str(corpus_path), "--canonical", "2", "--seed", "3", "--cap", "1"]
    assert main(args + ["--out", str(tmp_path / "x")]) == 0
    assert main(args + ["--out", str(tmp_path / "y")]) == 0
    for name in ("train.jsonl", "iid_test.jsonl", "cross_test.jsonl"):
        assert (tmp_path / "x" / name).read_bytes() == (tmp_path / "y" / name).read_bytes()
    capsys.readouterr()


def test_oracle_answer_command(corpus_path, capsys):
    corpus_records = list(read_jsonl(corpus_path))
    table = corpus_records[0]
    symptom = table["rows"][0]["symptoms"][0]
    code = main(
        [
            "oracle", "answer", "--corpus", str(corpus_path), "--table", table["table_id"],
            "--question", f"I have {symptom}, what disease do I have?",
        ]
    )
    assert code == 0
    payload = json.loads(capsys.readouterr().out.strip())
    assert table["rows"][0]["diagnosis"] in payload["candidates"]


def test_oracle_answer_unknown_table(corpus_path, capsys):
    code = main(
        [
            "oracle", "answer", "--corpus", str(corpus_path), "--table", "nope",
            "--question", "I have x, what disease do I have?",
        ]
    )
    assert code == 2
    capsys.readouterr()


def test_perturb_command(corpus_path, tmp_path, capsys):
    data_dir = tmp_path / "d"
    assert main(
        ["generate", "--corpus", str(corpus_path), "--tasks", "1,2", "--seed", "0", "--cap", "1", "--out", str(data_dir)]
    ) == 0
    out_path = tmp_path / "perturbed.jsonl"
    assert main(
        ["perturb", "--dataset", str(data_dir / "dataset.jsonl"), "--kind", "repeat", "--seed", "5", "--out", str(out_path)]
    ) == 0
    before = list(read_jsonl(data_dir / "dataset.jsonl"))
    after = list(read_jsonl(out_path))
    for b, a in zip(before, after):
        assert a["prompt"] == "A" * len(b["prompt"])
        assert a["perturbation"]["kind"] == "repeat"
    capsys.readouterr()


def test_stats_command(corpus_path, tmp_path, capsys):
    data_dir = tmp_path / "d"
    assert main(
        ["generate", "--corpus", str(corpus_path), "--tasks", "1,5", "--seed", "0", "--cap", "1", "--out", str(data_dir)]
    ) == 0
    capsys.readouterr()
    assert main(["stats", "--dataset", str(data_dir / "dataset.jsonl")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["tasks_with_negation"] == 1
    assert payload["n_instances"] == sum(payload["per_task_counts"].values())


def test_linearize_single_table(corpus_path, capsys):
    table_id = list(read_jsonl(corpus_path))[0]["table_id"]
    assert main(["linearize", "--corpus", str(corpus_path), "--table", table_id]) == 0
    out = capsys.readouterr().out
    assert out.startswith("Row 1 is: Diagnosis is ")


def test_exemplar_command(corpus_path, capsys):
    assert main(["exemplar", "--corpus", str(corpus_path), "--task", "5", "--with-instruction"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["task_id"] == 5
    assert payload["instruction"].startswith("Prompt: If ")


def test_config_file_defaults(corpus_path, tmp_path, capsys):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"cap": 1, "seed": 33}), encoding="utf-8")
    out_dir = tmp_path / "cfg"
    assert main(
        ["generate", "--corpus", str(corpus_path), "--tasks", "1", "--config", str(config), "--out", str(out_dir)]
    ) == 0
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["seeds"] == {"seed": 33}
    assert manifest["config"]["cap"] == 1
    assert manifest["config"]["config_file"] == {"cap": 1, "seed": 33}
    capsys.readouterr()


def test_module_entry_point_version():
    result = subprocess.run(
        [sys.executable, "-m", "biotabqa", "--version"], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert "biotabqa" in result.stdout
