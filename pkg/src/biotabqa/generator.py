"""Instantiate templates over table rows into question/answer instances.

Generation enumerates, for every (table, task, row), the slot combination
space in a canonical order: positive symptom choices (row order), then
positive sign choices, then negated choices from the negative pool. A
per-row cap samples without replacement from that space. The row-level
RNG is derived from (seed, table_id, task_id, row_index), so output is
identical whether tables are processed serially or in parallel, and
instances are always assembled in (table_id, task_id, row_index, combo)
order.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import oracle
from .errors import EmptyResult, UnknownTaskId
from .jsonl import read_jsonl, write_jsonl
from .seeding import derived_rng
from .tables import Corpus, DiagnosisTable, linearize_table, normalize_phrase
from .templates import TemplateSpec, get_template, mention_histogram, negation_count, render_pattern


class SkipReason(str, Enum):
    INSUFFICIENT_SYMPTOMS = "InsufficientSymptoms"
    INSUFFICIENT_SIGNS = "InsufficientSigns"
    EMPTY_NEGATIVE_POOL = "EmptyNegativePool"
    AMBIGUOUS_ANSWER = "AmbiguousAnswer"


@dataclass(frozen=True)
class ResolvedSlot:
    label: str
    kind: str
    negated: bool
    value: str


@dataclass(frozen=True)
class GenerationPolicy:
    seed: int = 0
    combos_per_row_cap: int | None = None  # None = unlimited
    enforce_unique_answer: bool = True
    negative_pool: str = "same-table"  # or "corpus-wide"

    def __post_init__(self):
        if self.combos_per_row_cap is not None and self.combos_per_row_cap < 1:
            raise ValueError("combos_per_row_cap must be >= 1 or None")
        if self.negative_pool not in ("same-table", "corpus-wide"):
            raise ValueError(f"unknown negative_pool {self.negative_pool!r}")


@dataclass(frozen=True)
class QAInstance:
    instance_id: str
    task_id: int
    table_id: str
    row_index: int
    question: str
    answer: str
    prompt: str
    slots: tuple[ResolvedSlot, ...]
    linearized_context: str


@dataclass(frozen=True)
class Dataset:
    instances: tuple[QAInstance, ...]
    policy: GenerationPolicy
    task_ids: frozenset[int]

    def __post_init__(self):
        ids = [inst.instance_id for inst in self.instances]
        if len(ids) != len(set(ids)):
            raise ValueError("instance_ids are not unique")
        stray = {inst.task_id for inst in self.instances} - set(self.task_ids)
        if stray:
            raise ValueError(f"instances reference tasks outside the dataset task set: {sorted(stray)}")


@dataclass(frozen=True)
class SkipRecord:
    table_id: str
    task_id: int
    row_index: int
    reason: SkipReason


@dataclass
class GenerationReport:
    skips: list[SkipRecord] = field(default_factory=list)
    counts: dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "skips": [
                {"table_id": s.table_id, "task_id": s.task_id, "row_index": s.row_index, "reason": s.reason.value}
                for s in self.skips
            ],
            "counts": {str(task_id): n for task_id, n in sorted(self.counts.items())},
        }


def negative_pool(
    table: DiagnosisTable,
    row_index: int,
    corpus: Corpus | None = None,
    scope: str = "same-table",
) -> list[str]:
    """Symptom phrases a negated slot may take: the pool (other rows of
    this table, or the whole corpus) minus the target row's own symptoms,
    deduplicated case-insensitively in first-appearance order."""
    own = {normalize_phrase(p) for p in table.rows[row_index].symptoms}
    pool: list[str] = []
    seen: set[str] = set()

    def _add_row(row) -> None:
        for phrase in row.symptoms:
            key = normalize_phrase(phrase)
            if key in own or key in seen:
                continue
            seen.add(key)
            pool.append(phrase)

    if scope == "same-table":
        for i, row in enumerate(table.rows):
            if i != row_index:
                _add_row(row)
    else:
        if corpus is None:
            raise ValueError("corpus-wide negative pool requires the corpus")
        for t in corpus.tables:
            for row in t.rows:
                _add_row(row)
    return pool


def _slot_groups(template: TemplateSpec) -> tuple[list, list, list]:
    pos_sym = [s for s in template.slots if s.kind == "symptom" and not s.negated]
    pos_sign = [s for s in template.slots if s.kind == "sign"]
    negated = [s for s in template.slots if s.negated]
    return pos_sym, pos_sign, negated


def _host_check(
    template: TemplateSpec, table: DiagnosisTable, row_index: int, pool: list[str]
) -> SkipReason | None:
    pos_sym, pos_sign, negated = _slot_groups(template)
    row = table.rows[row_index]
    if len(row.symptoms) < len(pos_sym):
        return SkipReason.INSUFFICIENT_SYMPTOMS
    if len(row.signs) < len(pos_sign):
        return SkipReason.INSUFFICIENT_SIGNS
    if negated and len(pool) < len(negated):
        return SkipReason.EMPTY_NEGATIVE_POOL
    return None


def combination_space_size(
    template: TemplateSpec, table: DiagnosisTable, row_index: int, pool: list[str]
) -> int:
    pos_sym, pos_sign, negated = _slot_groups(template)
    row = table.rows[row_index]
    return (
        comb(len(row.symptoms), len(pos_sym))
        * comb(len(row.signs), len(pos_sign))
        * comb(len(pool), len(negated))
    )


def enumerate_assignments(
    template: TemplateSpec, table: DiagnosisTable, row_index: int, pool: list[str]
) -> Iterator[tuple[ResolvedSlot, ...]]:
    """All slot assignments for (template, row) in canonical order.
    Caller must have passed the host check."""
    pos_sym, pos_sign, negated = _slot_groups(template)
    row = table.rows[row_index]
    for sym_values in combinations(row.symptoms, len(pos_sym)):
        for sign_values in combinations(row.signs, len(pos_sign)):
            for neg_values in combinations(pool, len(negated)):
                resolved = {}
                for slot, value in zip(pos_sym, sym_values):
                    resolved[(slot.kind, slot.label)] = value
                for slot, value in zip(pos_sign, sign_values):
                    resolved[(slot.kind, slot.label)] = value
                for slot, value in zip(negated, neg_values):
                    resolved[(slot.kind, slot.label)] = value
                yield tuple(
                    ResolvedSlot(label=s.label, kind=s.kind, negated=s.negated, value=resolved[(s.kind, s.label)])
                    for s in template.slots
                )


def sample_slots(
    template: TemplateSpec,
    table: DiagnosisTable,
    row_index: int,
    rng: random.Random,
    corpus: Corpus | None = None,
    negative_scope: str = "same-table",
) -> list[ResolvedSlot] | SkipReason:
    """One random slot assignment for (template, row); deterministic for a
    given rng state. Returns a SkipReason when the row cannot host the
    template."""
    pool = negative_pool(table, row_index, corpus, negative_scope)
    reason = _host_check(template, table, row_index, pool)
    if reason is not None:
        return reason
    pos_sym, pos_sign, negated = _slot_groups(template)
    row = table.rows[row_index]
    sym_values = rng.sample(row.symptoms, len(pos_sym))
    sign_values = rng.sample(row.signs, len(pos_sign))
    neg_values = rng.sample(pool, len(negated))
    resolved = {}
    for slot, value in zip(pos_sym, sym_values):
        resolved[(slot.kind, slot.label)] = value
    for slot, value in zip(pos_sign, sign_values):
        resolved[(slot.kind, slot.label)] = value
    for slot, value in zip(negated, neg_values):
        resolved[(slot.kind, slot.label)] = value
    return [
        ResolvedSlot(label=s.label, kind=s.kind, negated=s.negated, value=resolved[(s.kind, s.label)])
        for s in template.slots
    ]


def _render_instance(
    template: TemplateSpec,
    table: DiagnosisTable,
    row_index: int,
    slots: Sequence[ResolvedSlot],
    combo_index: int,
    context: str,
) -> QAInstance:
    values = {(s.kind, s.label): s.value for s in slots}
    question = render_pattern(template.question_pattern, values)
    prompt = render_pattern(template.prompt_pattern, values)
    return QAInstance(
        instance_id=f"{table.table_id}#t{template.task_id:02d}r{row_index}c{combo_index}",
        task_id=template.task_id,
        table_id=table.table_id,
        row_index=row_index,
        question=question,
        answer=table.rows[row_index].diagnosis,
        prompt=prompt,
        slots=tuple(slots),
        linearized_context=context,
    )


def _is_ambiguous(task_id: int, slots: Sequence[ResolvedSlot], table: DiagnosisTable) -> bool:
    result = oracle.execute_query(oracle.query_from_slots(task_id, slots), table)
    return len(result.candidates) > 1


def instantiate_template(
    template: TemplateSpec,
    table: DiagnosisTable,
    row_index: int,
    rng: random.Random,
    policy: GenerationPolicy,
    corpus: Corpus | None = None,
) -> QAInstance | SkipReason:
    """Render one randomly sampled instance for (template, table, row),
    or the SkipReason that prevents it."""
    slots = sample_slots(template, table, row_index, rng, corpus, policy.negative_pool)
    if isinstance(slots, SkipReason):
        return slots
    if policy.enforce_unique_answer and _is_ambiguous(template.task_id, slots, table):
        return SkipReason.AMBIGUOUS_ANSWER
    return _render_instance(template, table, row_index, slots, 0, linearize_table(table))


def _generate_for_table(
    table: DiagnosisTable,
    task_ids: Sequence[int],
    policy: GenerationPolicy,
    corpus: Corpus,
) -> tuple[list[QAInstance], list[SkipRecord]]:
    instances: list[QAInstance] = []
    skips: list[SkipRecord] = []
    context = linearize_table(table)
    for task_id in task_ids:
        template = get_template(task_id)
        for row_index in range(len(table.rows)):
            pool = negative_pool(table, row_index, corpus, policy.negative_pool)
            reason = _host_check(template, table, row_index, pool)
            if reason is not None:
                skips.append(SkipRecord(table.table_id, task_id, row_index, reason))
                continue
            total = combination_space_size(template, table, row_index, pool)
            chosen: set[int] | None = None
            if policy.combos_per_row_cap is not None and total > policy.combos_per_row_cap:
                rng = derived_rng(policy.seed, table.table_id, task_id, row_index)
                chosen = set(rng.sample(range(total), policy.combos_per_row_cap))
            emitted = 0
            for combo_index, slots in enumerate(enumerate_assignments(template, table, row_index, pool)):
                if chosen is not None and combo_index not in chosen:
                    continue
                if policy.enforce_unique_answer and _is_ambiguous(task_id, slots, table):
                    continue
                instances.append(_render_instance(template, table, row_index, slots, combo_index, context))
                emitted += 1
            if emitted == 0:
                skips.append(SkipRecord(table.table_id, task_id, row_index, SkipReason.AMBIGUOUS_ANSWER))
    return instances, skips


def generate_dataset(
    corpus: Corpus,
    task_ids: Iterable[int],
    policy: GenerationPolicy,
    jobs: int = 1,
) -> tuple[Dataset, GenerationReport]:
    """Enumerate instances for every (table, task, row). Each triple either
    yields at least one instance or appears in the report with its
    SkipReason. Raises EmptyResult when nothing can be generated."""
    task_list = sorted(set(task_ids))
    for task_id in task_list:
        if not 1 <= task_id <= 22:
            raise UnknownTaskId(task_id)
    tables = sorted(corpus.tables, key=lambda t: t.table_id)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda t: _generate_for_table(t, task_list, policy, corpus), tables))
    else:
        results = [_generate_for_table(t, task_list, policy, corpus) for t in tables]
    instances: list[QAInstance] = []
    report = GenerationReport()
    for per_table_instances, per_table_skips in results:
        instances.extend(per_table_instances)
        report.skips.extend(per_table_skips)
    if not instances:
        raise EmptyResult("no row of any table hosts any requested template")
    report.counts = {task_id: 0 for task_id in task_list}
    for inst in instances:
        report.counts[inst.task_id] += 1
    dataset = Dataset(instances=tuple(instances), policy=policy, task_ids=frozenset(task_list))
    return dataset, report


@dataclass(frozen=True)
class StatsReport:
    n_instances: int
    mean_question_tokens: int
    mean_prompt_tokens: int
    mean_table_tokens: int
    tasks_with_symsign: dict[int, int]
    tasks_with_negation: int
    per_task_counts: dict[int, int]

    def to_dict(self) -> dict:
        return {
            "n_instances": self.n_instances,
            "mean_question_tokens": self.mean_question_tokens,
            "mean_prompt_tokens": self.mean_prompt_tokens,
            "mean_table_tokens": self.mean_table_tokens,
            "tasks_with_symsign": {str(k): v for k, v in sorted(self.tasks_with_symsign.items())},
            "tasks_with_negation": self.tasks_with_negation,
            "per_task_counts": {str(k): v for k, v in sorted(self.per_task_counts.items())},
        }


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def _mean_tokens(texts: Iterable[str]) -> float:
    counts = [len(t.split()) for t in texts]
    return sum(counts) / len(counts) if counts else 0.0


def dataset_stats(dataset: Dataset) -> StatsReport:
    """Counts and whitespace-token length means, plus the task-set
    histogram of symptom/sign mentions and negation."""
    insts = dataset.instances
    per_task: dict[int, int] = {t: 0 for t in sorted(dataset.task_ids)}
    for inst in insts:
        per_task[inst.task_id] += 1
    return StatsReport(
        n_instances=len(insts),
        mean_question_tokens=_round_half_up(_mean_tokens(i.question for i in insts)),
        mean_prompt_tokens=_round_half_up(_mean_tokens(i.prompt for i in insts)),
        mean_table_tokens=_round_half_up(_mean_tokens(i.linearized_context for i in insts)),
        tasks_with_symsign=mention_histogram(set(dataset.task_ids)),
        tasks_with_negation=negation_count(set(dataset.task_ids)),
        per_task_counts=per_task,
    )


def instance_to_record(inst: QAInstance, extras: dict | None = None) -> dict:
    rec = {
        "instance_id": inst.instance_id,
        "task_id": inst.task_id,
        "table_id": inst.table_id,
        "row_index": inst.row_index,
        "question": inst.question,
        "answer": inst.answer,
        "prompt": inst.prompt,
        "slots": [
            {"label": s.label, "kind": s.kind, "negated": s.negated, "value": s.value} for s in inst.slots
        ],
        "linearized_context": inst.linearized_context,
    }
    if extras:
        rec.update(extras)
    return rec


def record_to_instance(rec: dict) -> QAInstance:
    slots = tuple(
        ResolvedSlot(label=s["label"], kind=s["kind"], negated=bool(s["negated"]), value=s["value"])
        for s in rec.get("slots", [])
    )
    return QAInstance(
        instance_id=rec["instance_id"],
        task_id=int(rec["task_id"]),
        table_id=rec["table_id"],
        row_index=int(rec["row_index"]),
        question=rec["question"],
        answer=rec["answer"],
        prompt=rec["prompt"],
        slots=slots,
        linearized_context=rec.get("linearized_context", ""),
    )


def write_dataset(dataset: Dataset, path: str | Path, extras_by_id: dict[str, dict] | None = None) -> int:
    extras_by_id = extras_by_id or {}
    return write_jsonl(
        path,
        (instance_to_record(inst, extras_by_id.get(inst.instance_id)) for inst in dataset.instances),
    )


def read_dataset_records(path: str | Path) -> list[dict]:
    return list(read_jsonl(path))


def records_to_dataset(records: Iterable[dict], policy: GenerationPolicy | None = None) -> Dataset:
    instances = tuple(record_to_instance(rec) for rec in records)
    task_ids = frozenset(inst.task_id for inst in instances)
    return Dataset(instances=instances, policy=policy or GenerationPolicy(), task_ids=task_ids)
