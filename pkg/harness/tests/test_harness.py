import json

import pytest
import torch

from conftest import tiny_records
from tabqa_harness.baseline import context_diagnoses, random_row_predictions
from tabqa_harness.cli import main
from tabqa_harness.config import TrainConfig, config_from_sources, read_config_file
from tabqa_harness.data import (
    assemble_tokens,
    find_answer_span,
    make_eval_examples,
    make_training_examples,
)
from tabqa_harness.errors import (
    AnswerSpanNotFound,
    ArtifactIncompatible,
    EmptyTaskData,
    MissingInstructionField,
)
from tabqa_harness.model import SpanExtractor, best_spans
from tabqa_harness.predict import PredictionRun, load_artifact, run_predict
from tabqa_harness.report import TREND_LABEL, trend_report
from tabqa_harness.train import run_finetune
from tabqa_harness.vocab import build_vocab, tokenize


def test_config_defaults_match_contract():
    config = TrainConfig(train_path="x.jsonl", regime="mtm")
    assert config.learning_rate == 5e-5
    assert config.epochs == 4
    assert config.batch_size == 16
    assert config.max_len == 512


def test_config_stm_requires_task():
    with pytest.raises(ValueError):
        TrainConfig(train_path="x.jsonl", regime="stm")
    TrainConfig(train_path="x.jsonl", regime="stm", task_id=3)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "train.conf"
    path.write_text(
        "# toy run\nregime = in-mtm\nlearning_rate = 0.001\nepochs = 2\ntrain_path = data.jsonl\n",
        encoding="utf-8",
    )
    values = read_config_file(path)
    assert values == {"regime": "in-mtm", "learning_rate": 0.001, "epochs": 2, "train_path": "data.jsonl"}
    config = config_from_sources(path, {"epochs": 5, "seed": None})
    assert config.epochs == 5  # explicit override wins
    assert config.learning_rate == 0.001
    assert config.seed == 0


def test_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.conf"
    path.write_text("regime = mtm\nwat = 1\n", encoding="utf-8")
    with pytest.raises(ValueError):
        config_from_sources(path, {})


def test_tokenize_splits_punctuation():
    assert tokenize("Diagnosis is Migraine, Key symptoms") == [
        "diagnosis", "is", "migraine", ",", "key", "symptoms",
    ]


def test_vocab_round_trip():
    vocab = build_vocab(["alpha beta", "beta gamma!"])
    ids = vocab.encode(["alpha", "!", "unseen"])
    assert vocab.decode(ids[:2]) == ["alpha", "!"]
    assert ids[2] == vocab.unk_id
    assert vocab.itos[:3] == ("[PAD]", "[UNK]", "[CLS]")


def test_assemble_tokens_layout():
    tokens, ctx_start, ctx_end, full = assemble_tokens("Why?", "Row 1 is: Diagnosis is Flu", None, 512)
    assert tokens[0] == "[CLS]"
    assert tokens[1:3] == ["question", ":"]
    assert tokens[ctx_start:ctx_end] == tokenize("Row 1 is: Diagnosis is Flu")
    assert full == ctx_end - ctx_start
    with_instr = assemble_tokens("Why?", "c", "Prompt: x", 512)[0]
    assert with_instr[-6:] == [",", "instruction", ":", "prompt", ":", "x"]


def test_assemble_truncates_context_tail_only():
    context = " ".join(f"tok{i}" for i in range(100))
    tokens, ctx_start, ctx_end, full = assemble_tokens("Q?", context, "I", 40)
    assert full == 100
    kept = tokens[ctx_start:ctx_end]
    assert kept == tokenize(context)[: len(kept)]
    assert len(tokens) <= 40
    # question and instruction survive
    assert "q" in tokens and "i" in tokens


def test_find_answer_span():
    context = tokenize("Row 1 is: Diagnosis is Tension headache, Key symptoms are x")
    span = find_answer_span(context, "Tension headache")
    assert span is not None
    assert context[span[0] : span[1] + 1] == ["tension", "headache"]
    assert find_answer_span(context, "absent disease") is None


def test_make_training_examples_gold_spans():
    examples, dropped = make_training_examples(tiny_records(), "in-mtm", None, 512)
    assert not dropped
    for ex in examples:
        assert ex.start is not None and ex.start <= ex.end < ex.context_end
        answer_tokens = list(ex.tokens[ex.start : ex.end + 1])
        assert answer_tokens == tokenize(ex.answer)


def test_make_training_examples_missing_instruction():
    records = [dict(rec) for rec in tiny_records()]
    for rec in records:
        rec.pop("instruction")
    with pytest.raises(MissingInstructionField):
        make_training_examples(records, "in-mtm", None, 512)
    examples, _ = make_training_examples(records, "mtm", None, 512)
    assert examples


def test_make_training_examples_stm_filters_task():
    with pytest.raises(EmptyTaskData):
        make_training_examples(tiny_records(), "stm", 2, 512)
    examples, _ = make_training_examples(tiny_records(), "stm", 1, 512)
    assert len(examples) == 3


def test_make_training_examples_answer_not_in_context():
    records = [dict(tiny_records()[0])]
    records[0]["answer"] = "Imaginaryitis"
    with pytest.raises(AnswerSpanNotFound):
        make_training_examples(records, "mtm", None, 512)


def test_truncated_span_is_dropped_and_reported():
    records = [dict(tiny_records()[2])]  # Migraine sits in row 3, late in the context
    examples, dropped = make_training_examples(records, "mtm", None, 24)
    assert examples == []
    assert dropped == [records[0]["instance_id"]]


def test_model_shapes_and_masking():
    model = SpanExtractor(vocab_size=30, dim=16, heads=2, layers=1, ffn_dim=32, max_len=32)
    ids = torch.randint(3, 30, (2, 10))
    mask = torch.ones(2, 10, dtype=torch.bool)
    mask[1, 6:] = False
    start, end = model(ids, mask)
    assert start.shape == end.shape == (2, 10)
    assert torch.isfinite(start[0]).all()
    assert (start[1, 6:] < -1e30).all()


def test_best_spans_respect_context_and_band():
    start = torch.zeros(1, 10)
    end = torch.zeros(1, 10)
    start[0, 2] = 5.0  # outside context, must be ignored
    start[0, 5] = 4.0
    end[0, 6] = 4.0
    s, e = best_spans(start, end, torch.tensor([4]), torch.tensor([9]), max_span_len=4)
    assert (s.item(), e.item()) == (5, 6)
    # end before start is never chosen
    end[0, 4] = 10.0
    s, e = best_spans(start, end, torch.tensor([4]), torch.tensor([9]), max_span_len=4)
    assert e.item() >= s.item()


def _write_records(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")


def test_train_predict_round_trip(tmp_path):
    train_path = tmp_path / "train.jsonl"
    _write_records(train_path, tiny_records() * 4)
    config = TrainConfig(
        train_path=str(train_path), regime="mtm", learning_rate=1e-3,
        epochs=2, batch_size=4, max_len=128, seed=0, dim=32, layers=1, heads=2, ffn_dim=64,
    )
    artifact = tmp_path / "model.pt"
    result = run_finetune(config, artifact)
    assert result.artifact_path.exists()
    assert (tmp_path / "model.pt.manifest.json").exists()
    manifest = json.loads((tmp_path / "model.pt.manifest.json").read_text())
    assert manifest["config"]["learning_rate"] == 1e-3
    assert manifest["seeds"] == {"seed": 0}

    eval_path = tmp_path / "eval.jsonl"
    _write_records(eval_path, tiny_records())
    out = run_predict(PredictionRun(str(artifact), str(eval_path), str(tmp_path / "pred.jsonl")))
    rows = [json.loads(line) for line in open(out, encoding="utf-8")]
    assert len(rows) == 3
    assert [row["instance_id"] for row in rows] == [rec["instance_id"] for rec in tiny_records()]
    assert all(isinstance(row["prediction"], str) and row["prediction"] for row in rows)


def test_predict_echo_gold(tmp_path):
    eval_path = tmp_path / "eval.jsonl"
    _write_records(eval_path, tiny_records())
    out = run_predict(PredictionRun("", str(eval_path), str(tmp_path / "gold.jsonl"), echo_gold=True))
    rows = [json.loads(line) for line in open(out, encoding="utf-8")]
    assert [row["prediction"] for row in rows] == [rec["answer"] for rec in tiny_records()]


def test_predict_passes_perturbation_tags(tmp_path):
    records = [dict(rec) for rec in tiny_records()]
    for rec in records:
        rec["perturbation"] = {"kind": "repeat", "seed": 5, "donor_task_id": None}
    eval_path = tmp_path / "eval.jsonl"
    _write_records(eval_path, records)
    out = run_predict(PredictionRun("", str(eval_path), str(tmp_path / "pred.jsonl"), echo_gold=True))
    rows = [json.loads(line) for line in open(out, encoding="utf-8")]
    assert all(row["perturbation"]["kind"] == "repeat" for row in rows)
    manifest = json.loads((tmp_path / "pred.jsonl.manifest.json").read_text())
    assert manifest["perturbation_kinds"] == ["repeat"]


def test_artifact_incompatible(tmp_path):
    junk = tmp_path / "junk.pt"
    torch.save({"format": "other"}, junk)
    with pytest.raises(ArtifactIncompatible):
        load_artifact(junk)
    notafile = tmp_path / "text.pt"
    notafile.write_text("hello", encoding="utf-8")
    with pytest.raises(ArtifactIncompatible):
        load_artifact(notafile)


def test_context_diagnoses_parses_linearization():
    context = tiny_records()[0]["linearized_context"]
    assert context_diagnoses(context) == ["Gout", "Flu", "Migraine"]


def test_baseline_predictions_deterministic(tmp_path):
    eval_path = tmp_path / "eval.jsonl"
    _write_records(eval_path, tiny_records())
    a = random_row_predictions(eval_path, tmp_path / "a.jsonl", seed=3)
    b = random_row_predictions(eval_path, tmp_path / "b.jsonl", seed=3)
    assert a.read_bytes() == b.read_bytes()
    rows = [json.loads(line) for line in open(a, encoding="utf-8")]
    assert all(row["prediction"] in ("Gout", "Flu", "Migraine") for row in rows)


def test_trend_report_direction_and_label(tmp_path):
    def _report(path, em):
        _write_records(path, [{"row": "task", "task_id": 1, "n": 5, "em": em}, {"row": "overall", "em": em}])

    in_mtm, mtm = tmp_path / "in.jsonl", tmp_path / "mtm.jsonl"
    _report(in_mtm, 0.8)
    _report(mtm, 0.7)
    payload = trend_report(in_mtm, mtm, tmp_path / "trend.json")
    assert payload["in_mtm_at_least_mtm"] is True
    assert payload["kind"] == TREND_LABEL
    assert "trend observation" in payload["kind"]
    saved = json.loads((tmp_path / "trend.json").read_text())
    assert saved == payload


def test_cli_usage_errors(capsys):
    assert main([]) == 1
    assert main(["train", "--out", "x.pt"]) == 1  # no train path anywhere
    capsys.readouterr()


def test_cli_data_errors(tmp_path, capsys):
    assert main(["predict", "--artifact", str(tmp_path / "no.pt"), "--dataset", str(tmp_path / "no.jsonl"), "--out", str(tmp_path / "p.jsonl")]) == 2
    capsys.readouterr()
