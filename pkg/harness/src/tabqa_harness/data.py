"""Dataset-file loading and example assembly.

Consumes the benchmark's dataset JSONL records (question, answer, prompt,
linearized_context, optional instruction/perturbation fields). The model
input is "[CLS] Question: {Q}, Context: {C}" plus ", Instruction: {I}"
for the instruction-tuned regime. When the assembled input exceeds the
token budget, only the context tail is truncated; the question and
instruction are never cut. Training examples whose gold span falls in the
truncated tail are dropped and reported."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import AnswerSpanNotFound, EmptyTaskData, MissingInstructionField
from .vocab import CLS, tokenize


def read_records(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


@dataclass(frozen=True)
class Example:
    instance_id: str
    task_id: int
    tokens: tuple[str, ...]
    context_start: int
    context_end: int  # exclusive
    answer: str
    overlap: tuple[bool, ...] = ()  # context token also occurs in the question
    segment: tuple[bool, ...] = ()  # True for the instruction block
    start: int | None = None  # gold span, training only
    end: int | None = None  # inclusive


def assemble_tokens(
    question: str, context: str, instruction: str | None, max_len: int
) -> tuple[list[str], int, int, int]:
    """Returns (tokens, context_start, context_end, full_context_len)."""
    prefix = tokenize(f"Question: {question}, Context:")
    suffix = tokenize(f", Instruction: {instruction}") if instruction else []
    context_tokens = tokenize(context)
    budget = max(0, max_len - 1 - len(prefix) - len(suffix))
    kept = context_tokens[:budget]
    tokens = [CLS] + prefix + kept + suffix
    context_start = 1 + len(prefix)
    return tokens, context_start, context_start + len(kept), len(context_tokens)


def question_overlap_flags(
    tokens: list[str], question: str, context_start: int, context_end: int
) -> tuple[bool, ...]:
    """Aligned exact-match feature: flag context tokens that also occur in
    the question (word tokens only). Standard extractive-QA input feature;
    the encoder still has to localize the match to a row and point at the
    diagnosis slot."""
    question_words = {tok for tok in tokenize(question) if tok.isalnum()}
    return tuple(
        context_start <= i < context_end and tok in question_words
        for i, tok in enumerate(tokens)
    )


def segment_flags(n_tokens: int, context_end: int, has_instruction: bool) -> tuple[bool, ...]:
    if not has_instruction:
        return (False,) * n_tokens
    return tuple(i >= context_end for i in range(n_tokens))


def find_answer_span(context_tokens: list[str], answer: str) -> tuple[int, int] | None:
    """First occurrence of the answer token sequence inside the context
    tokens; indices are context-relative, end inclusive."""
    needle = tokenize(answer)
    if not needle:
        return None
    limit = len(context_tokens) - len(needle)
    for i in range(limit + 1):
        if context_tokens[i : i + len(needle)] == needle:
            return i, i + len(needle) - 1
    return None


def _instruction_for(rec: dict, regime: str, path: str) -> str | None:
    if regime != "in-mtm":
        return None
    instruction = rec.get("instruction")
    if not instruction:
        raise MissingInstructionField(path)
    return instruction


def make_training_examples(
    records: list[dict], regime: str, task_id: int | None, max_len: int, path: str = "<records>"
) -> tuple[list[Example], list[str]]:
    """Examples with gold spans. Raises AnswerSpanNotFound if an answer is
    absent from its full context; returns instance ids dropped because
    truncation cut their span away."""
    if regime == "stm":
        records = [rec for rec in records if int(rec["task_id"]) == task_id]
        if not records:
            raise EmptyTaskData(task_id, path)
    examples: list[Example] = []
    dropped: list[str] = []
    for rec in records:
        instruction = _instruction_for(rec, regime, path)
        tokens, ctx_start, ctx_end, full_len = assemble_tokens(
            rec["question"], rec["linearized_context"], instruction, max_len
        )
        span = find_answer_span(tokenize(rec["linearized_context"]), rec["answer"])
        if span is None:
            raise AnswerSpanNotFound(rec["instance_id"])
        kept = ctx_end - ctx_start
        if span[1] >= kept:
            dropped.append(rec["instance_id"])
            continue
        examples.append(
            Example(
                instance_id=rec["instance_id"],
                task_id=int(rec["task_id"]),
                tokens=tuple(tokens),
                context_start=ctx_start,
                context_end=ctx_end,
                answer=rec["answer"],
                overlap=question_overlap_flags(tokens, rec["question"], ctx_start, ctx_end),
                segment=segment_flags(len(tokens), ctx_end, instruction is not None),
                start=ctx_start + span[0],
                end=ctx_start + span[1],
            )
        )
    return examples, dropped


def make_eval_examples(records: list[dict], use_instruction: bool, max_len: int) -> list[Example]:
    examples = []
    for rec in records:
        instruction = rec.get("instruction") if use_instruction else None
        tokens, ctx_start, ctx_end, _ = assemble_tokens(
            rec["question"], rec["linearized_context"], instruction, max_len
        )
        examples.append(
            Example(
                instance_id=rec["instance_id"],
                task_id=int(rec["task_id"]),
                tokens=tuple(tokens),
                context_start=ctx_start,
                context_end=ctx_end,
                answer=rec.get("answer", ""),
                overlap=question_overlap_flags(tokens, rec["question"], ctx_start, ctx_end),
                segment=segment_flags(len(tokens), ctx_end, bool(instruction)),
            )
        )
    return examples
