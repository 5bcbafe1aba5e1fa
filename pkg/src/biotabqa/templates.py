"""The 22 question templates and their instruction prompts.

Each template pairs a question pattern with a prompt pattern over slot
placeholders written "{symptom A}" / "{sign B}". Placeholder braces are
internal; rendered questions and prompts never contain them. The catalog
text is frozen verbatim from the source material, including its quirks:
task 6 has a stray space before its first comma, task 7 misspells
"exhibiting" and has no question mark, task 11 omits the space after its
first comma. Task 18's prompt uses the two-symptom form to match its
two-symptom question.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import UnknownTaskId

PLACEHOLDER_RE = re.compile(r"\{(symptom|sign) ([A-D])\}")


@dataclass(frozen=True)
class SlotSpec:
    label: str  # "A".."D"
    kind: str  # "symptom" | "sign"
    negated: bool = False

    @property
    def mention(self) -> str:
        """Generic surface form of the placeholder, e.g. "symptom A"."""
        return f"{self.kind} {self.label}"


@dataclass(frozen=True)
class SlotSummary:
    n_symptoms: int
    n_signs: int
    n_negated: int
    total_mentions: int


@dataclass(frozen=True)
class TemplateSpec:
    task_id: int
    question_pattern: str
    prompt_pattern: str
    slots: tuple[SlotSpec, ...]

    def slot(self, kind: str, label: str) -> SlotSpec:
        for s in self.slots:
            if s.kind == kind and s.label == label:
                return s
        raise KeyError((kind, label))


# (task_id, question_pattern, prompt_pattern); negated slots listed below.
_RAW: list[tuple[int, str, str]] = [
    (
        1,
        "I have {symptom A}, what disease do I have?",
        "If {symptom A} is in symptom list, report corresponding disease.",
    ),
    (
        2,
        "I have {symptom A} and {sign A}, what is my diagnosis?",
        "If {symptom A} is in symptom list, and {sign A} is in sign list, report corresponding disease.",
    ),
    (
        3,
        "I have {symptom A} and {symptom B}, what is wrong with me?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        4,
        "I have {sign A} and {sign B}, what disease do you think I have?",
        "If {sign A} is in sign list, and {sign B} is in sign list, report corresponding disease.",
    ),
    (
        5,
        "I have {symptom A} and {symptom B} but not {symptom C}, what is my potential diagnosis?",
        "If {symptom A} and {symptom B} are in symptom list, but {symptom C} is not in symptom list, report corresponding disease.",
    ),
    (
        6,
        "A patient is showing {symptom A} , {symptom B} and {symptom C}, what could be causing this?",
        "If {symptom A}, {symptom B} and {symptom C} are in symptom list, report corresponding disease.",
    ),
    (
        7,
        "A patient is exhibitng {symptom A} and {sign A}, diagnose her",
        "If {symptom A} is in symptom list, and {sign A} is in sign list, report corresponding disease.",
    ),
    (
        8,
        "What disease can cause {symptom A} and {symptom B}?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        9,
        "What disease causes {symptom A}, {symptom B} and {sign A}?",
        "If {symptom A} and {symptom B} are in symptom list, and {sign A} is in sign list, report corresponding disease.",
    ),
    (
        10,
        "If my friend has {symptom A} and {symptom B}, then what is his potential diagnosis?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        11,
        "The patient has {symptom A},{symptom B} and {symptom C}, what disease can cause these symptoms?",
        "If {symptom A}, {symptom B} and {symptom C} are in symptom list, report corresponding disease.",
    ),
    (
        12,
        "Which disease is associated with {symptom A} and {symptom B}?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        13,
        "A patient is complaining about {symptom A}, {symptom B} and {symptom C}, diagnose him.",
        "If {symptom A}, {symptom B} and {symptom C} are in symptom list, report corresponding disease.",
    ),
    (
        14,
        "What disease is responsible for {symptom A}, {symptom B} and {symptom C}?",
        "If {symptom A}, {symptom B} and {symptom C} are in symptom list, report corresponding disease.",
    ),
    (
        15,
        "I am experiencing {symptom A}, what is wrong with me?",
        "If {symptom A} is in symptom list, report corresponding disease.",
    ),
    (
        16,
        "Why am I experiencing {symptom A} and {symptom B}?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        17,
        "I have {symptom A}, {symptom B} and {symptom C}, why is this happening?",
        "If {symptom A}, {symptom B} and {symptom C} are in symptom list, report corresponding disease.",
    ),
    (
        18,
        "A patient is showing {symptom A} and {symptom B}, what illness is associated with these symptoms?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        19,
        "I have {symptom A}, and {symptom B}, what disease may I have?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        20,
        "I have {symptom A} and {symptom B}, what possible disease could I have?",
        "If {symptom A} and {symptom B} are in symptom list, report corresponding disease.",
    ),
    (
        21,
        "What is causing my {symptom A}?",
        "If {symptom A} is in symptom list, report corresponding disease.",
    ),
    (
        22,
        "I have {symptom A}, {symptom B}, {symptom C} but no {symptom D}, what is causing this?",
        "If {symptom A}, {symptom B} and {symptom C} are in symptom list, but {symptom D} is not in symptom list, report corresponding disease.",
    ),
]

_NEGATED: dict[int, set[tuple[str, str]]] = {
    5: {("symptom", "C")},
    22: {("symptom", "D")},
}


def _build_spec(task_id: int, question: str, prompt: str) -> TemplateSpec:
    negated = _NEGATED.get(task_id, set())
    slots: list[SlotSpec] = []
    seen: set[tuple[str, str]] = set()
    for kind, label in PLACEHOLDER_RE.findall(question):
        key = (kind, label)
        if key in seen:
            raise ValueError(f"task {task_id}: placeholder {key} repeats in question")
        seen.add(key)
        slots.append(SlotSpec(label=label, kind=kind, negated=key in negated))
    prompt_keys = set(PLACEHOLDER_RE.findall(prompt))
    if not prompt_keys <= seen:
        raise ValueError(f"task {task_id}: prompt placeholders {prompt_keys - seen} missing from question")
    return TemplateSpec(task_id=task_id, question_pattern=question, prompt_pattern=prompt, slots=tuple(slots))


_CATALOG: tuple[TemplateSpec, ...] = tuple(_build_spec(*row) for row in _RAW)


def template_catalog() -> list[TemplateSpec]:
    """All 22 templates, task_ids 1..22 in order."""
    return list(_CATALOG)


def get_template(task_id: int) -> TemplateSpec:
    if not 1 <= task_id <= len(_CATALOG):
        raise UnknownTaskId(task_id)
    return _CATALOG[task_id - 1]


def slot_summary(spec: TemplateSpec) -> SlotSummary:
    """Mention counts for a template. Negated slots count as symptom
    mentions (and toward total_mentions) as well as n_negated."""
    n_symptoms = sum(1 for s in spec.slots if s.kind == "symptom")
    n_signs = sum(1 for s in spec.slots if s.kind == "sign")
    n_negated = sum(1 for s in spec.slots if s.negated)
    return SlotSummary(
        n_symptoms=n_symptoms,
        n_signs=n_signs,
        n_negated=n_negated,
        total_mentions=n_symptoms + n_signs,
    )


def render_pattern(pattern: str, values: dict[tuple[str, str], str]) -> str:
    """Substitute slot values into a pattern. values is keyed by
    (kind, label); every placeholder must be covered."""

    def _sub(match: re.Match) -> str:
        key = (match.group(1), match.group(2))
        try:
            return values[key]
        except KeyError:
            raise ValueError(f"no value for placeholder {{{key[0]} {key[1]}}}") from None

    return PLACEHOLDER_RE.sub(_sub, pattern)


def generic_prompt(spec: TemplateSpec) -> str:
    """The prompt with each placeholder replaced by its generic mention
    ("symptom A"), i.e. the human-readable catalog form."""
    return PLACEHOLDER_RE.sub(lambda m: f"{m.group(1)} {m.group(2)}", spec.prompt_pattern)


def generic_question(spec: TemplateSpec) -> str:
    return PLACEHOLDER_RE.sub(lambda m: f"{m.group(1)} {m.group(2)}", spec.question_pattern)


def mention_histogram(task_ids: set[int]) -> dict[int, int]:
    """How many of the given tasks carry k = 1..4 symptom/sign mentions."""
    hist = {1: 0, 2: 0, 3: 0, 4: 0}
    for task_id in sorted(task_ids):
        hist[slot_summary(get_template(task_id)).total_mentions] += 1
    return hist


def negation_count(task_ids: set[int]) -> int:
    return sum(1 for task_id in task_ids if slot_summary(get_template(task_id)).n_negated > 0)


def template_record(spec: TemplateSpec) -> dict:
    return {
        "task_id": spec.task_id,
        "question_pattern": spec.question_pattern,
        "prompt_pattern": spec.prompt_pattern,
        "slots": [
            {"label": s.label, "kind": s.kind, "negated": s.negated} for s in spec.slots
        ],
    }
