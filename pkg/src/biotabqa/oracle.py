"""Deterministic answer engine: parse a templated question back into its
slots, then select every table row whose symptom/sign lists satisfy them.

Parsing compiles each template into a regex skeleton (literal segments
with lazy capture holes). Skeletons are tried in descending order of
total literal length, first full match wins; several templates share
prefixes, so only full-skeleton matches count. Literal matching is
case-insensitive and captures are trimmed. Slot values that contain an
inter-slot delimiter (", ", " and ", " but not ", " but no ") are
inherently ambiguous to parse, which is why generated instances carry
their slots as metadata and the executor can be fed those directly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import NoTemplateMatch
from .tables import DiagnosisTable, normalize_phrase
from .templates import PLACEHOLDER_RE, TemplateSpec, get_template, slot_summary, template_catalog


@dataclass(frozen=True)
class StructuredQuery:
    task_id: int
    positive_symptoms: tuple[str, ...] = ()
    positive_signs: tuple[str, ...] = ()
    negated_symptoms: tuple[str, ...] = ()


@dataclass(frozen=True)
class OracleResult:
    candidates: tuple[str, ...]
    unique: bool


@dataclass(frozen=True)
class _Skeleton:
    spec: TemplateSpec
    regex: re.Pattern
    literal_length: int
    group_keys: tuple[tuple[str, str], ...]  # (kind, label) per capture group


def _compile_skeleton(spec: TemplateSpec) -> _Skeleton:
    parts: list[str] = []
    keys: list[tuple[str, str]] = []
    pos = 0
    literal_length = 0
    for match in PLACEHOLDER_RE.finditer(spec.question_pattern):
        literal = spec.question_pattern[pos : match.start()]
        literal_length += len(literal)
        parts.append(re.escape(literal))
        parts.append(r"(.+?)")
        keys.append((match.group(1), match.group(2)))
        pos = match.end()
    tail = spec.question_pattern[pos:]
    literal_length += len(tail)
    parts.append(re.escape(tail))
    regex = re.compile("".join(parts), re.IGNORECASE)
    return _Skeleton(spec=spec, regex=regex, literal_length=literal_length, group_keys=tuple(keys))


# Longest-literal first; ties broken by task_id for determinism.
_SKELETONS: tuple[_Skeleton, ...] = tuple(
    sorted(
        (_compile_skeleton(spec) for spec in template_catalog()),
        key=lambda s: (-s.literal_length, s.spec.task_id),
    )
)


def _query_from_values(spec: TemplateSpec, values: dict[tuple[str, str], str]) -> StructuredQuery:
    positive_symptoms: list[str] = []
    positive_signs: list[str] = []
    negated_symptoms: list[str] = []
    for slot in spec.slots:
        value = values[(slot.kind, slot.label)]
        if slot.negated:
            negated_symptoms.append(value)
        elif slot.kind == "symptom":
            positive_symptoms.append(value)
        else:
            positive_signs.append(value)
    return StructuredQuery(
        task_id=spec.task_id,
        positive_symptoms=tuple(positive_symptoms),
        positive_signs=tuple(positive_signs),
        negated_symptoms=tuple(negated_symptoms),
    )


def parse_question(question: str) -> StructuredQuery:
    """Match the question against all 22 skeletons; raise NoTemplateMatch
    if none matches end to end."""
    for skeleton in _SKELETONS:
        match = skeleton.regex.fullmatch(question)
        if match is None:
            continue
        values = {
            key: match.group(i + 1).strip() for i, key in enumerate(skeleton.group_keys)
        }
        if any(not v for v in values.values()):
            continue
        return _query_from_values(skeleton.spec, values)
    raise NoTemplateMatch(question)


def query_from_slots(task_id: int, slots) -> StructuredQuery:
    """Build a query from generated-instance slot metadata (preferred over
    re-parsing the question text when available)."""
    spec = get_template(task_id)
    values = {(s.kind, s.label): s.value for s in slots}
    missing = {(s.kind, s.label) for s in spec.slots} - set(values)
    if missing:
        raise ValueError(f"slots missing placeholders {sorted(missing)} for task {task_id}")
    return _query_from_values(spec, values)


def execute_query(query: StructuredQuery, table: DiagnosisTable) -> OracleResult:
    """Candidates are all rows containing every positive symptom/sign and
    none of the negated symptoms; comparisons are case-insensitive with
    whitespace collapsed; row order is preserved."""
    pos_sym = [normalize_phrase(p) for p in query.positive_symptoms]
    pos_sign = [normalize_phrase(p) for p in query.positive_signs]
    neg_sym = [normalize_phrase(p) for p in query.negated_symptoms]
    candidates: list[str] = []
    for row in table.rows:
        symptoms = {normalize_phrase(p) for p in row.symptoms}
        signs = {normalize_phrase(p) for p in row.signs}
        if all(p in symptoms for p in pos_sym) and all(p in signs for p in pos_sign) and not any(
            p in symptoms for p in neg_sym
        ):
            candidates.append(row.diagnosis)
    return OracleResult(candidates=tuple(candidates), unique=len(candidates) == 1)


def oracle_answer(question: str, table: DiagnosisTable) -> OracleResult:
    return execute_query(parse_question(question), table)


def expected_query_shape(task_id: int) -> tuple[int, int, int]:
    """(positive symptoms, positive signs, negated symptoms) a valid query
    for this task must carry."""
    summary = slot_summary(get_template(task_id))
    return (
        summary.n_symptoms - summary.n_negated,
        summary.n_signs,
        summary.n_negated,
    )
