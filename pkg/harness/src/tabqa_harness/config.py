"""Training configuration. Loadable from a flat key=value file; CLI flags
override file values. Defaults: learning rate 5e-5, 4 epochs, batch size
16, max input length 512."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

REGIMES = ("stm", "mtm", "in-mtm")


@dataclass(frozen=True)
class TrainConfig:
    train_path: str = ""
    regime: str = "in-mtm"
    task_id: int | None = None  # required for stm
    learning_rate: float = 5e-5
    epochs: int = 4
    batch_size: int = 16
    max_len: int = 512
    seed: int = 0
    # model shape (trained from scratch; no pretrained hub in this setup)
    dim: int = 128
    layers: int = 2
    heads: int = 4
    ffn_dim: int = 256
    dropout: float = 0.1

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.regime == "stm" and self.task_id is None:
            raise ValueError("stm regime requires task_id")

    def to_dict(self) -> dict:
        return {
            "train_path": self.train_path,
            "regime": self.regime,
            "task_id": self.task_id,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "max_len": self.max_len,
            "seed": self.seed,
            "dim": self.dim,
            "layers": self.layers,
            "heads": self.heads,
            "ffn_dim": self.ffn_dim,
            "dropout": self.dropout,
        }


def _coerce(value: str):
    try:
        return json.loads(value)
    except json.JSONDecodeError:
        return value


def read_config_file(path: str | Path) -> dict:
    """`key = value` lines; blank lines and # comments ignored. Values are
    parsed as JSON scalars where possible, else kept as strings."""
    out: dict = {}
    for line_number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{line_number}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = _coerce(value.strip())
    return out


def config_from_sources(file_path: str | Path | None, overrides: dict) -> TrainConfig:
    values = read_config_file(file_path) if file_path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    known = set(TrainConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return TrainConfig(**values)
