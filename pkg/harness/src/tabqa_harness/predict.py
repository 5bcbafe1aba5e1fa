"""Prediction export in the benchmark's predictions-file format
({instance_id, prediction} per line). Perturbation tags on input records
pass through to the output records and manifest. A gold-echo debug mode
predicts the answer field verbatim to self-check the scoring path."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import torch

from .data import make_eval_examples, read_records
from .errors import ArtifactIncompatible
from .model import SpanExtractor, best_spans
from .train import ARTIFACT_FORMAT, ARTIFACT_VERSION
from .vocab import Vocab


@dataclass(frozen=True)
class PredictionRun:
    artifact_path: str
    dataset_path: str
    output_path: str
    echo_gold: bool = False
    batch_size: int = 64


def load_artifact(path: str | Path) -> dict:
    try:
        payload = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise ArtifactIncompatible(f"cannot load artifact {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != ARTIFACT_FORMAT:
        raise ArtifactIncompatible(f"{path} is not a {ARTIFACT_FORMAT} artifact")
    if payload.get("format_version") != ARTIFACT_VERSION:
        raise ArtifactIncompatible(
            f"{path} has format_version {payload.get('format_version')}, expected {ARTIFACT_VERSION}"
        )
    return payload


def _write_predictions(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def run_predict(run: PredictionRun) -> Path:
    started = time.perf_counter()
    records = read_records(run.dataset_path)
    perturbation_kinds = sorted(
        {rec["perturbation"]["kind"] for rec in records if isinstance(rec.get("perturbation"), dict)}
    )
    rows: list[dict] = []
    config: dict = {}
    if run.echo_gold:
        for rec in records:
            row = {"instance_id": rec["instance_id"], "prediction": rec["answer"]}
            if rec.get("perturbation"):
                row["perturbation"] = rec["perturbation"]
            rows.append(row)
    else:
        payload = load_artifact(run.artifact_path)
        config = payload["config"]
        vocab = Vocab(itos=tuple(payload["vocab"]))
        model = SpanExtractor(
            vocab_size=len(vocab),
            dim=config["dim"],
            heads=config["heads"],
            layers=config["layers"],
            ffn_dim=config["ffn_dim"],
            max_len=config["max_len"],
            dropout=config["dropout"],
            pad_id=vocab.pad_id,
        )
        model.load_state_dict(payload["state_dict"])
        model.eval()
        use_instruction = config["regime"] == "in-mtm"
        examples = make_eval_examples(records, use_instruction, config["max_len"])
        with torch.no_grad():
            for lo in range(0, len(examples), run.batch_size):
                batch = examples[lo : lo + run.batch_size]
                width = max(len(ex.tokens) for ex in batch)
                ids = torch.full((len(batch), width), vocab.pad_id, dtype=torch.long)
                mask = torch.zeros((len(batch), width), dtype=torch.bool)
                overlap = torch.zeros((len(batch), width), dtype=torch.bool)
                segment = torch.zeros((len(batch), width), dtype=torch.bool)
                for row_i, ex in enumerate(batch):
                    encoded = vocab.encode(ex.tokens)
                    ids[row_i, : len(encoded)] = torch.tensor(encoded, dtype=torch.long)
                    mask[row_i, : len(encoded)] = True
                    if ex.overlap:
                        overlap[row_i, : len(ex.overlap)] = torch.tensor(ex.overlap, dtype=torch.bool)
                    if ex.segment:
                        segment[row_i, : len(ex.segment)] = torch.tensor(ex.segment, dtype=torch.bool)
                start_logits, end_logits = model(ids, mask, overlap, segment)
                starts, ends = best_spans(
                    start_logits,
                    end_logits,
                    torch.tensor([ex.context_start for ex in batch]),
                    torch.tensor([ex.context_end for ex in batch]),
                )
                for ex, s, e in zip(batch, starts.tolist(), ends.tolist()):
                    prediction = " ".join(ex.tokens[s : e + 1])
                    rows.append({"instance_id": ex.instance_id, "prediction": prediction})
        by_id = {rec["instance_id"]: rec for rec in records}
        for row in rows:
            perturbation = by_id[row["instance_id"]].get("perturbation")
            if perturbation:
                row["perturbation"] = perturbation
    out_path = Path(run.output_path)
    _write_predictions(out_path, rows)
    manifest = {
        "command": "predict",
        "artifact": None if run.echo_gold else str(run.artifact_path),
        "dataset": str(run.dataset_path),
        "echo_gold": run.echo_gold,
        "model_config": config,
        "perturbation_kinds": perturbation_kinds,
        "counts": {"predictions": len(rows)},
        "duration_seconds": round(time.perf_counter() - started, 3),
    }
    Path(str(out_path) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return out_path
