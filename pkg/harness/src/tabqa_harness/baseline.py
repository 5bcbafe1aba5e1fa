"""Random-row baseline: predict a uniformly random diagnosis from the
instance's linearized context. The floor any trained model must beat."""

from __future__ import annotations

import hashlib
import json
import random
import re
import time
from pathlib import Path

from .data import read_records

_DIAGNOSIS_RE = re.compile(r"Diagnosis is (.*?), Key symptoms are ")


def context_diagnoses(linearized_context: str) -> list[str]:
    return _DIAGNOSIS_RE.findall(linearized_context)


def _rng_for(seed: int, instance_id: str) -> random.Random:
    digest = hashlib.sha256(f"{seed}:{instance_id}".encode()).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def random_row_predictions(dataset_path: str | Path, output_path: str | Path, seed: int = 0) -> Path:
    started = time.perf_counter()
    records = read_records(dataset_path)
    rows = []
    for rec in records:
        options = context_diagnoses(rec["linearized_context"])
        pick = _rng_for(seed, rec["instance_id"]).choice(options) if options else ""
        rows.append({"instance_id": rec["instance_id"], "prediction": pick})
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    manifest = {
        "command": "baseline",
        "dataset": str(dataset_path),
        "seeds": {"seed": seed},
        "counts": {"predictions": len(rows)},
        "duration_seconds": round(time.perf_counter() - started, 3),
    }
    Path(str(output_path) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return output_path
