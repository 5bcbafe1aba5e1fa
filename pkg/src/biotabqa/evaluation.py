"""Exact-match scoring of prediction files against gold datasets.

Normalization: case-fold, strip the characters .,;:!?, collapse
whitespace. Per-task EM is the mean over that task's instances; split
averages are unweighted means over task EMs (macro) by default, with an
instance-weighted micro variant behind a flag.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DuplicatePrediction, UnknownInstanceId
from .generator import QAInstance
from .jsonl import read_jsonl
from .splits import SplitSpec

_PUNCT_RE = re.compile(r"[.,;:!?]")


def normalize_answer(text: str) -> str:
    return " ".join(_PUNCT_RE.sub("", text.casefold()).split())


def exact_match(prediction: str, gold: str) -> int:
    return int(normalize_answer(prediction) == normalize_answer(gold))


@dataclass(frozen=True)
class TaskScore:
    n: int
    em: float


@dataclass(frozen=True)
class EvalReport:
    per_task: dict[int, TaskScore]
    overall: float
    macro_avg_train_tasks: float | None = None
    macro_avg_cross_tasks: float | None = None
    average: str = "macro"
    missing_predictions: int = 0

    def to_dict(self) -> dict:
        return {
            "per_task": {
                str(task_id): {"n": score.n, "em": score.em}
                for task_id, score in sorted(self.per_task.items())
            },
            "overall": self.overall,
            "macro_avg_train_tasks": self.macro_avg_train_tasks,
            "macro_avg_cross_tasks": self.macro_avg_cross_tasks,
            "average": self.average,
            "missing_predictions": self.missing_predictions,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EvalReport":
        return cls(
            per_task={
                int(task_id): TaskScore(n=int(v["n"]), em=float(v["em"]))
                for task_id, v in obj["per_task"].items()
            },
            overall=float(obj["overall"]),
            macro_avg_train_tasks=obj.get("macro_avg_train_tasks"),
            macro_avg_cross_tasks=obj.get("macro_avg_cross_tasks"),
            average=obj.get("average", "macro"),
            missing_predictions=int(obj.get("missing_predictions", 0)),
        )


def load_predictions(path: str | Path) -> dict[str, str]:
    """Read a predictions file ({instance_id, prediction} per line).
    Raises DuplicatePrediction on a repeated instance_id."""
    predictions: dict[str, str] = {}
    for rec in read_jsonl(path):
        instance_id = rec["instance_id"]
        if instance_id in predictions:
            raise DuplicatePrediction(instance_id)
        predictions[instance_id] = rec.get("prediction", "")
    return predictions


def score_predictions(
    predictions: dict[str, str],
    instances: Sequence[QAInstance],
    split: SplitSpec | None = None,
    average: str = "macro",
) -> EvalReport:
    """Score predictions against gold instances. Every prediction must
    reference a known instance_id; instances without a prediction score 0
    and are counted in missing_predictions."""
    if average not in ("macro", "micro"):
        raise ValueError(f"average must be macro or micro, got {average!r}")
    known = {inst.instance_id for inst in instances}
    for instance_id in predictions:
        if instance_id not in known:
            raise UnknownInstanceId(instance_id)
    hits: dict[int, int] = {}
    totals: dict[int, int] = {}
    missing = 0
    for inst in instances:
        totals[inst.task_id] = totals.get(inst.task_id, 0) + 1
        pred = predictions.get(inst.instance_id)
        if pred is None:
            missing += 1
            continue
        hits[inst.task_id] = hits.get(inst.task_id, 0) + exact_match(pred, inst.answer)
    per_task = {
        task_id: TaskScore(n=n, em=hits.get(task_id, 0) / n) for task_id, n in totals.items()
    }

    def _macro(task_ids: Iterable[int]) -> float | None:
        ems = [per_task[t].em for t in sorted(task_ids) if t in per_task]
        return sum(ems) / len(ems) if ems else None

    def _micro(task_ids: Iterable[int]) -> float | None:
        pairs = [(hits.get(t, 0), per_task[t].n) for t in task_ids if t in per_task]
        total = sum(n for _, n in pairs)
        return sum(h for h, _ in pairs) / total if total else None

    combine = _macro if average == "macro" else _micro
    overall = combine(per_task) or 0.0
    return EvalReport(
        per_task=per_task,
        overall=overall,
        macro_avg_train_tasks=combine(split.train_tasks) if split else None,
        macro_avg_cross_tasks=combine(split.cross_tasks) if split else None,
        average=average,
        missing_predictions=missing,
    )


def report_records(report: EvalReport) -> list[dict]:
    """Machine-readable rows: one per task, then the average rows."""
    rows: list[dict] = [
        {"row": "task", "task_id": task_id, "n": score.n, "em": round(score.em, 4)}
        for task_id, score in sorted(report.per_task.items())
    ]
    rows.append({"row": "overall", "average": report.average, "em": round(report.overall, 4)})
    if report.macro_avg_train_tasks is not None:
        rows.append({"row": "avg_train_tasks", "em": round(report.macro_avg_train_tasks, 4)})
    if report.macro_avg_cross_tasks is not None:
        rows.append({"row": "avg_cross_tasks", "em": round(report.macro_avg_cross_tasks, 4)})
    if report.missing_predictions:
        rows.append({"row": "coverage_warning", "missing_predictions": report.missing_predictions})
    return rows


def render_report_table(report: EvalReport) -> str:
    lines = ["Task ID    n      EM", "-" * 21]
    for task_id, score in sorted(report.per_task.items()):
        lines.append(f"{task_id:<8} {score.n:<6} {score.em:.3f}")
    lines.append("-" * 21)
    lines.append(f"{'Overall':<15} {report.overall:.3f}")
    if report.macro_avg_train_tasks is not None:
        lines.append(f"{'Avg. train':<15} {report.macro_avg_train_tasks:.3f}")
    if report.macro_avg_cross_tasks is not None:
        lines.append(f"{'Avg. cross':<15} {report.macro_avg_cross_tasks:.3f}")
    if report.missing_predictions:
        lines.append(f"warning: {report.missing_predictions} instance(s) had no prediction (scored 0)")
    return "\n".join(lines)
