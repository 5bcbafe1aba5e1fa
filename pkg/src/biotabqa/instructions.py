"""Instruction blocks and their perturbations.

An instruction is "Prompt: p. Question: q. Answer: a" where q/a form an
in-context exemplar for the task and p is the task prompt rendered with
the exemplar's slot values. Model inputs are assembled as
"Question: {Q}, Context: {C}, Instruction: {I}"; any model-specific
classifier token is the consumer's business, not handled here.

Perturbations rewrite only the prompt sentence p, never the exemplar:
  mismatched     another task's prompt, in generic catalog form
  repeat         "A" repeated to p's character length
  random-string  lowercase letters, p's character length
  random-words   words from a fixed 64-word neutral list, p's word count
"""

from __future__ import annotations

import re
import string
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .errors import ExemplarMismatch, InvalidDonor, NoExemplarAvailable
from .generator import ResolvedSlot, enumerate_assignments, _host_check, negative_pool
from .seeding import derived_rng
from .tables import Corpus
from .templates import TemplateSpec, generic_prompt, get_template, render_pattern, template_catalog


@dataclass(frozen=True)
class Exemplar:
    task_id: int
    table_id: str
    row_index: int
    question: str
    answer: str
    slots: tuple[ResolvedSlot, ...]


@dataclass(frozen=True)
class Instruction:
    task_id: int
    prompt: str
    exemplar_question: str
    exemplar_answer: str
    rendered: str


class PerturbationKind(str, Enum):
    MISMATCHED = "mismatched"
    REPEAT = "repeat"
    RANDOM_STRING = "random-string"
    RANDOM_WORDS = "random-words"


# Exactly 64 neutral everyday words; none of them collide with the
# template delimiters ("and", "but", "no", "not").
NEUTRAL_WORDS: tuple[str, ...] = (
    "hello", "bye", "you", "east", "west", "north", "south", "morning",
    "evening", "river", "mountain", "valley", "meadow", "harbor", "island", "forest",
    "green", "blue", "yellow", "purple", "silver", "golden", "crimson", "amber",
    "table", "chair", "window", "door", "garden", "bridge", "lantern", "basket",
    "paper", "letter", "story", "page", "pencil", "ribbon", "marble", "candle",
    "cloud", "rain", "snow", "wind", "thunder", "sunshine", "mist", "frost",
    "apple", "orange", "lemon", "cherry", "walnut", "maple", "cedar", "willow",
    "circle", "square", "corner", "middle", "summer", "winter", "spring", "autumn",
)


def _terminated(text: str) -> str:
    return text if text.endswith((".", "!", "?")) else text + "."


def render_instruction_text(prompt: str, question: str, answer: str) -> str:
    return f"Prompt: {_terminated(prompt)} Question: {_terminated(question)} Answer: {answer}"


def select_exemplar(
    task_id: int,
    corpus: Corpus,
    exclude_table_id: str | None = None,
    seed: int = 0,
) -> Exemplar:
    """First instantiable (table, row, combination) in canonical order,
    starting from the lexicographically smallest eligible table_id. The
    seed is accepted for interface symmetry; the default selection is
    purely positional and ignores it."""
    template = get_template(task_id)
    for table in sorted(corpus.tables, key=lambda t: t.table_id):
        if table.table_id == exclude_table_id:
            continue
        for row_index in range(len(table.rows)):
            pool = negative_pool(table, row_index)
            if _host_check(template, table, row_index, pool) is not None:
                continue
            slots = next(enumerate_assignments(template, table, row_index, pool))
            values = {(s.kind, s.label): s.value for s in slots}
            return Exemplar(
                task_id=task_id,
                table_id=table.table_id,
                row_index=row_index,
                question=render_pattern(template.question_pattern, values),
                answer=table.rows[row_index].diagnosis,
                slots=tuple(slots),
            )
    raise NoExemplarAvailable(task_id, exclude_table_id)


def build_instruction(task_id: int, exemplar: Exemplar) -> Instruction:
    """Render the instruction block. The exemplar must belong to task_id;
    we verify by re-rendering its question from its slots."""
    if exemplar.task_id != task_id:
        raise ExemplarMismatch(f"exemplar is for task {exemplar.task_id}, not {task_id}")
    template = get_template(task_id)
    values = {(s.kind, s.label): s.value for s in exemplar.slots}
    if render_pattern(template.question_pattern, values) != exemplar.question:
        raise ExemplarMismatch(f"exemplar question does not render from task {task_id}'s pattern")
    prompt = render_pattern(template.prompt_pattern, values)
    return Instruction(
        task_id=task_id,
        prompt=prompt,
        exemplar_question=exemplar.question,
        exemplar_answer=exemplar.answer,
        rendered=render_instruction_text(prompt, exemplar.question, exemplar.answer),
    )


def assemble_model_input(question: str, linearized_context: str, instruction: str | None = None) -> str:
    base = f"Question: {question}, Context: {linearized_context}"
    if instruction:
        return f"{base}, Instruction: {instruction}"
    return base


def default_donor(task_id: int) -> int:
    """Next task in cyclic order whose prompt text differs from task_id's
    (several tasks share a prompt verbatim, and a mismatched prompt must
    actually differ)."""
    original = get_template(task_id).prompt_pattern
    donor = task_id % 22 + 1
    while get_template(donor).prompt_pattern == original:
        donor = donor % 22 + 1
        if donor == task_id:
            raise InvalidDonor(task_id, donor)
    return donor


def perturb_prompt(
    prompt: str,
    task_id: int,
    kind: PerturbationKind,
    seed: int = 0,
    donor_task_id: int | None = None,
    salt: str = "",
) -> str:
    """Rewrite a prompt under one perturbation kind; deterministic per
    (seed, kind, task_id, salt)."""
    if kind is PerturbationKind.MISMATCHED:
        donor = donor_task_id if donor_task_id is not None else default_donor(task_id)
        if donor == task_id or not 1 <= donor <= 22:
            raise InvalidDonor(task_id, donor)
        return generic_prompt(get_template(donor))
    rng = derived_rng(seed, kind.value, task_id, salt)
    if kind is PerturbationKind.REPEAT:
        return "A" * len(prompt)
    if kind is PerturbationKind.RANDOM_STRING:
        return "".join(rng.choice(string.ascii_lowercase) for _ in range(len(prompt)))
    if kind is PerturbationKind.RANDOM_WORDS:
        return " ".join(rng.choice(NEUTRAL_WORDS) for _ in range(len(prompt.split())))
    raise ValueError(f"unknown perturbation kind {kind!r}")


def perturb_instruction(
    instruction: Instruction,
    kind: PerturbationKind,
    seed: int = 0,
    donor_task_id: int | None = None,
) -> Instruction:
    """Same instruction with the prompt sentence perturbed; the exemplar
    question/answer stay untouched."""
    new_prompt = perturb_prompt(instruction.prompt, instruction.task_id, kind, seed, donor_task_id)
    return Instruction(
        task_id=instruction.task_id,
        prompt=new_prompt,
        exemplar_question=instruction.exemplar_question,
        exemplar_answer=instruction.exemplar_answer,
        rendered=render_instruction_text(new_prompt, instruction.exemplar_question, instruction.exemplar_answer),
    )


_EMBEDDED_PROMPT_RE = re.compile(r"^Prompt: (.*?) Question: ")


def perturb_records(
    records: Iterable[dict],
    kind: PerturbationKind,
    seed: int = 0,
    donor_task_id: int | None = None,
) -> list[dict]:
    """Dataset-file perturbation: rewrite each record's prompt field (and
    the prompt sentence inside an attached instruction, if present) and
    tag the record with perturbation metadata."""
    out = []
    for rec in records:
        rec = dict(rec)
        task_id = int(rec["task_id"])
        donor = None
        if kind is PerturbationKind.MISMATCHED:
            donor = donor_task_id if donor_task_id is not None else default_donor(task_id)
        rec["prompt"] = perturb_prompt(
            rec["prompt"], task_id, kind, seed, donor, salt=rec["instance_id"]
        )
        if rec.get("instruction"):
            match = _EMBEDDED_PROMPT_RE.match(rec["instruction"])
            if match:
                embedded = match.group(1)
                new_embedded = perturb_prompt(
                    embedded, task_id, kind, seed, donor, salt=rec["instance_id"] + "#instruction"
                )
                rec["instruction"] = (
                    f"Prompt: {_terminated(new_embedded)} Question: "
                    + rec["instruction"][match.end() :]
                )
        rec["perturbation"] = {"kind": kind.value, "seed": seed, "donor_task_id": donor}
        out.append(rec)
    return out


@dataclass(frozen=True)
class BudgetCheck:
    tokens: int
    fits: bool


def whitespace_tokens(text: str) -> int:
    return len(text.split())


def budget_check(
    model_input: str,
    budget: int = 512,
    counter: Callable[[str], int] = whitespace_tokens,
) -> BudgetCheck:
    """Token-budget check with a pluggable counter (whitespace default);
    fits is inclusive at the boundary."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    tokens = counter(model_input)
    return BudgetCheck(tokens=tokens, fits=tokens <= budget)


def attach_instructions(
    records: list[dict],
    corpus: Corpus,
    mode: str = "fixed",
    seed: int = 0,
) -> list[dict]:
    """Add an instruction field to dataset records. mode "fixed" selects
    one exemplar per task over the whole corpus; "per-table" re-selects
    per record, excluding the record's own table."""
    if mode not in ("fixed", "per-table"):
        raise ValueError(f"unknown exemplar mode {mode!r}")
    cache: dict[tuple[int, str | None], str] = {}
    out = []
    for rec in records:
        rec = dict(rec)
        task_id = int(rec["task_id"])
        exclude = rec["table_id"] if mode == "per-table" else None
        key = (task_id, exclude)
        if key not in cache:
            exemplar = select_exemplar(task_id, corpus, exclude_table_id=exclude, seed=seed)
            cache[key] = build_instruction(task_id, exemplar).rendered
        rec["instruction"] = cache[key]
        out.append(rec)
    return out


def catalog_prompts() -> dict[int, str]:
    """Generic (placeholder-free) prompt text per task."""
    return {spec.task_id: generic_prompt(spec) for spec in template_catalog()}
