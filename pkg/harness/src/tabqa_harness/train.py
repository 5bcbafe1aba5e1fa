"""Fine-tuning loop: cross-entropy on gold span start/end positions.
Seed-deterministic up to torch's documented CPU nondeterminism; every
seed is echoed into the artifact manifest."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import torch
from torch import nn

from .config import TrainConfig
from .data import Example, make_training_examples, read_records
from .model import SpanExtractor
from .vocab import Vocab, vocab_from_token_seqs

ARTIFACT_FORMAT = "tabqa-harness-span-extractor"
ARTIFACT_VERSION = 1


@dataclass
class TrainResult:
    artifact_path: Path
    n_examples: int
    dropped: list[str]
    epoch_losses: list[float]


def _batch_tensors(examples: list[Example], vocab: Vocab, indices, device) -> dict:
    batch = [examples[i] for i in indices]
    width = max(len(ex.tokens) for ex in batch)
    ids = torch.full((len(batch), width), vocab.pad_id, dtype=torch.long, device=device)
    mask = torch.zeros((len(batch), width), dtype=torch.bool, device=device)
    overlap = torch.zeros((len(batch), width), dtype=torch.bool, device=device)
    segment = torch.zeros((len(batch), width), dtype=torch.bool, device=device)
    for row, ex in enumerate(batch):
        encoded = vocab.encode(ex.tokens)
        ids[row, : len(encoded)] = torch.tensor(encoded, dtype=torch.long, device=device)
        mask[row, : len(encoded)] = True
        if ex.overlap:
            overlap[row, : len(ex.overlap)] = torch.tensor(ex.overlap, dtype=torch.bool, device=device)
        if ex.segment:
            segment[row, : len(ex.segment)] = torch.tensor(ex.segment, dtype=torch.bool, device=device)
    out = {
        "ids": ids,
        "mask": mask,
        "overlap": overlap,
        "segment": segment,
        "context_start": torch.tensor([ex.context_start for ex in batch], dtype=torch.long, device=device),
        "context_end": torch.tensor([ex.context_end for ex in batch], dtype=torch.long, device=device),
    }
    if batch[0].start is not None:
        out["start"] = torch.tensor([ex.start for ex in batch], dtype=torch.long, device=device)
        out["end"] = torch.tensor([ex.end for ex in batch], dtype=torch.long, device=device)
    return out


def run_finetune(config: TrainConfig, artifact_path: str | Path) -> TrainResult:
    started = time.perf_counter()
    records = read_records(config.train_path)
    examples, dropped = make_training_examples(
        records, config.regime, config.task_id, config.max_len, str(config.train_path)
    )
    vocab = vocab_from_token_seqs(ex.tokens for ex in examples)

    torch.manual_seed(config.seed)
    device = torch.device("cuda" if torch.cuda.is_available() else "cpu")
    model = SpanExtractor(
        vocab_size=len(vocab),
        dim=config.dim,
        heads=config.heads,
        layers=config.layers,
        ffn_dim=config.ffn_dim,
        max_len=config.max_len,
        dropout=config.dropout,
        pad_id=vocab.pad_id,
    ).to(device)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()

    generator = torch.Generator().manual_seed(config.seed)
    model.train()
    epoch_losses: list[float] = []
    for _epoch in range(config.epochs):
        order = torch.randperm(len(examples), generator=generator).tolist()
        total = 0.0
        n_batches = 0
        for lo in range(0, len(order), config.batch_size):
            batch = _batch_tensors(examples, vocab, order[lo : lo + config.batch_size], device)
            start_logits, end_logits = model(batch["ids"], batch["mask"], batch["overlap"], batch["segment"])
            # answers are context spans by construction, so the softmax
            # competes over context positions only
            positions = torch.arange(start_logits.size(1), device=device).unsqueeze(0)
            in_context = (positions >= batch["context_start"].unsqueeze(1)) & (
                positions < batch["context_end"].unsqueeze(1)
            )
            neg = torch.finfo(start_logits.dtype).min
            start_logits = start_logits.masked_fill(~in_context, neg)
            end_logits = end_logits.masked_fill(~in_context, neg)
            loss = loss_fn(start_logits, batch["start"]) + loss_fn(end_logits, batch["end"])
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            total += loss.item()
            n_batches += 1
        epoch_losses.append(total / max(1, n_batches))

    artifact_path = Path(artifact_path)
    artifact_path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "format": ARTIFACT_FORMAT,
            "format_version": ARTIFACT_VERSION,
            "state_dict": model.state_dict(),
            "vocab": list(vocab.itos),
            "config": config.to_dict(),
            "dropped_instances": dropped,
        },
        artifact_path,
    )
    manifest = {
        "command": "train",
        "config": config.to_dict(),
        "seeds": {"seed": config.seed},
        "counts": {"examples": len(examples), "dropped_truncated": len(dropped)},
        "epoch_losses": [round(loss, 4) for loss in epoch_losses],
        "duration_seconds": round(time.perf_counter() - started, 3),
        "artifact": str(artifact_path),
    }
    Path(str(artifact_path) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
    )
    return TrainResult(artifact_path=artifact_path, n_examples=len(examples), dropped=dropped, epoch_losses=epoch_losses)
