"""Fixtures. The toy corpus generator writes benchmark corpus files
directly (the file format is the integration surface; the harness never
imports the benchmark package). Split materialization shells out to the
benchmark CLI."""

import json
import random
import subprocess
import sys
from pathlib import Path

import pytest

# Single-word phrase pools keep the toy matching task word-level, which a
# scratch-trained compact encoder can pick up within a toy budget.
_SYMPTOMS = [
    "wheezing", "sneezing", "nausea", "vertigo", "fatigue", "fever", "chills", "rash", "itching", "swelling",
    "cramping", "bloating", "dizziness", "headache", "insomnia", "drowsiness", "tremor", "stiffness", "numbness", "tingling",
    "palpitations", "sweating", "shivering", "hoarseness", "congestion", "drooling", "blurring", "ringing", "hiccups", "weakness",
    "aching", "soreness", "thirst", "dryness", "paleness", "flushing", "twitching", "gagging", "retching", "spasms",
    "malaise", "lethargy", "restlessness", "irritability", "confusion", "forgetfulness", "clumsiness", "stuttering", "slurring", "limping",
    "wobbling", "fainting", "gasping", "panting", "snoring", "yawning", "blinking", "squinting", "coughing", "vomiting",
]
_SIGNS = [
    "tachycardia", "bradycardia", "hypertension", "hypotension", "pallor", "cyanosis", "jaundice", "edema", "tenderness", "rigidity",
    "clubbing", "wheezes", "crackles", "murmur", "distension", "guarding", "atrophy", "ptosis", "mydriasis", "nystagmus",
    "bruising", "stridor", "lordosis", "kyphosis",
]
_NAMES = [
    a + b
    for a in ["Alvi", "Brimo", "Cand", "Dore", "Eska", "Fenra", "Gald", "Hest", "Ilva", "Jorm", "Kelv", "Lumb"]
    for b in ["dosis", "pathy", "lemia", "tritis"]
]


def write_toy_corpus(path: Path, n_tables: int = 50, seed: int = 101, rows=(3, 4)) -> Path:
    rng = random.Random(seed)
    sym_pool = list(_SYMPTOMS)
    sign_pool = list(_SIGNS)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(n_tables):
            n_rows = rng.randint(*rows)
            diagnoses = rng.sample(_NAMES, n_rows)
            table_sym = rng.sample(sym_pool, n_rows * 4)
            table_sign = rng.sample(sign_pool, n_rows * 3)
            rows_out = [
                {
                    "diagnosis": d,
                    "symptoms": rng.sample(table_sym, rng.randint(3, 5)),
                    "signs": rng.sample(table_sign, rng.randint(2, 3)),
                }
                for d in diagnoses
            ]
            fh.write(json.dumps({"table_id": f"t{i:03d}", "rows": rows_out}) + "\n")
    return path


def benchmark_cli(*args: str) -> str:
    result = subprocess.run(
        [sys.executable, "-m", "biotabqa", *args], capture_output=True, text=True
    )
    assert result.returncode == 0, f"biotabqa {' '.join(args)} failed:\n{result.stdout}\n{result.stderr}"
    return result.stdout


@pytest.fixture(scope="session")
def toy_split(tmp_path_factory) -> Path:
    """50-table corpus materialized as canonical split 1 with fixed
    per-task instructions attached. The 0.55 train-table fraction gives
    the from-scratch toy models enough table diversity to generalize."""
    root = tmp_path_factory.mktemp("toy")
    corpus = write_toy_corpus(root / "corpus.jsonl")
    benchmark_cli(
        "split", "--corpus", str(corpus), "--canonical", "1", "--seed", "11",
        "--fraction", "0.55", "--cap", "3", "--instructions", "fixed", "--out", str(root / "s1"),
    )
    return root / "s1"


def tiny_records() -> list[dict]:
    """A handful of hand-built dataset records for fast unit tests."""
    rows = [
        ("Gout", ["joint pain", "swelling"], ["tophi"]),
        ("Flu", ["fever", "chills"], ["high temperature"]),
        ("Migraine", ["unilateral headache", "nausea"], ["normal examination"]),
    ]
    context = "; ".join(
        f"Row {i} is: Diagnosis is {d}, Key symptoms are {', '.join(sym)}, Key signs are {', '.join(sig)}"
        for i, (d, sym, sig) in enumerate(rows, start=1)
    )
    records = []
    for i, (diagnosis, symptoms, _signs) in enumerate(rows):
        records.append(
            {
                "instance_id": f"x#t01r{i}c0",
                "task_id": 1,
                "table_id": "x",
                "row_index": i,
                "question": f"I have {symptoms[0]}, what disease do I have?",
                "answer": diagnosis,
                "prompt": f"If {symptoms[0]} is in symptom list, report corresponding disease.",
                "slots": [{"label": "A", "kind": "symptom", "negated": False, "value": symptoms[0]}],
                "linearized_context": context,
                "instruction": (
                    "Prompt: If fever is in symptom list, report corresponding disease. "
                    "Question: I have fever, what disease do I have? Answer: Flu"
                ),
            }
        )
    return records
