"""Diagnosis tables: ingestion, validation, linearization.

A table holds rows of (diagnosis, key symptoms, key signs). Tables are
the answering context for every generated question, so ingestion is
strict: a corpus file either loads with every table valid or raises.
Validation itself never raises; it returns violations as data so callers
can report all of them at once.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import DuplicateTableId, MalformedRecord


def normalize_phrase(text: str) -> str:
    """Canonical form used everywhere phrases are compared: case-folded
    with whitespace runs collapsed."""
    return " ".join(text.casefold().split())


@dataclass(frozen=True)
class DiagnosisRow:
    diagnosis: str
    symptoms: tuple[str, ...]
    signs: tuple[str, ...]

    def __init__(self, diagnosis: str, symptoms: Iterable[str], signs: Iterable[str]):
        object.__setattr__(self, "diagnosis", diagnosis)
        object.__setattr__(self, "symptoms", tuple(symptoms))
        object.__setattr__(self, "signs", tuple(signs))


@dataclass(frozen=True)
class DiagnosisTable:
    table_id: str
    rows: tuple[DiagnosisRow, ...]

    def __init__(self, table_id: str, rows: Iterable[DiagnosisRow]):
        object.__setattr__(self, "table_id", table_id)
        object.__setattr__(self, "rows", tuple(rows))


@dataclass(frozen=True)
class Corpus:
    tables: tuple[DiagnosisTable, ...]
    source_label: str = ""

    def __init__(self, tables: Iterable[DiagnosisTable], source_label: str = ""):
        object.__setattr__(self, "tables", tuple(tables))
        object.__setattr__(self, "source_label", source_label)

    def table(self, table_id: str) -> DiagnosisTable:
        for t in self.tables:
            if t.table_id == table_id:
                return t
        raise KeyError(table_id)

    def table_ids(self) -> list[str]:
        return [t.table_id for t in self.tables]


class ViolationKind(str, Enum):
    EMPTY_TABLE_ID = "EmptyTableId"
    EMPTY_TABLE = "EmptyTable"
    EMPTY_DIAGNOSIS = "EmptyDiagnosis"
    EMPTY_PHRASE = "EmptyPhrase"
    UNTRIMMED_PHRASE = "UntrimmedPhrase"
    DUPLICATE_PHRASE = "DuplicatePhrase"
    DUPLICATE_DIAGNOSIS = "DuplicateDiagnosis"
    DUPLICATE_TABLE_ID = "DuplicateTableId"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    table_id: str
    detail: str
    row_index: int | None = None
    severity: str = "error"


@dataclass(frozen=True)
class ValidationPolicy:
    # "error" blocks loading; "warning" is reported but tolerated.
    duplicate_diagnosis: str = "error"


DEFAULT_POLICY = ValidationPolicy()


def validate_table(table: DiagnosisTable, policy: ValidationPolicy = DEFAULT_POLICY) -> list[Violation]:
    """Return every invariant violation in the table; [] means valid.

    The duplicate-diagnosis check compares diagnoses case-insensitively
    with whitespace collapsed, since gold answers must stay unambiguous
    under exact-match normalization.
    """
    out: list[Violation] = []
    tid = table.table_id
    if not tid.strip():
        out.append(Violation(ViolationKind.EMPTY_TABLE_ID, tid, "table_id is empty"))
    if not table.rows:
        out.append(Violation(ViolationKind.EMPTY_TABLE, tid, "table has no rows"))
    seen_diagnoses: dict[str, int] = {}
    for i, row in enumerate(table.rows):
        if not row.diagnosis.strip():
            out.append(Violation(ViolationKind.EMPTY_DIAGNOSIS, tid, "diagnosis is empty", i))
        key = normalize_phrase(row.diagnosis)
        if key and key in seen_diagnoses:
            out.append(
                Violation(
                    ViolationKind.DUPLICATE_DIAGNOSIS,
                    tid,
                    f"diagnosis {row.diagnosis!r} duplicates row {seen_diagnoses[key]}",
                    i,
                    severity=policy.duplicate_diagnosis,
                )
            )
        elif key:
            seen_diagnoses[key] = i
        for kind_name, phrases in (("symptom", row.symptoms), ("sign", row.signs)):
            seen: set[str] = set()
            for phrase in phrases:
                if not phrase.strip():
                    out.append(Violation(ViolationKind.EMPTY_PHRASE, tid, f"empty {kind_name} phrase", i))
                    continue
                if phrase != phrase.strip():
                    out.append(
                        Violation(
                            ViolationKind.UNTRIMMED_PHRASE,
                            tid,
                            f"{kind_name} phrase {phrase!r} has surrounding whitespace",
                            i,
                        )
                    )
                norm = normalize_phrase(phrase)
                if norm in seen:
                    out.append(
                        Violation(
                            ViolationKind.DUPLICATE_PHRASE,
                            tid,
                            f"{kind_name} phrase {phrase!r} duplicated in row",
                            i,
                        )
                    )
                seen.add(norm)
    return out


def _row_from_obj(obj: dict, line_number: int) -> DiagnosisRow:
    try:
        diagnosis = obj["diagnosis"]
        symptoms = obj["symptoms"]
        signs = obj["signs"]
    except (KeyError, TypeError) as exc:
        raise MalformedRecord(line_number, f"row missing field: {exc}") from exc
    if not isinstance(diagnosis, str) or not isinstance(symptoms, list) or not isinstance(signs, list):
        raise MalformedRecord(line_number, "row fields must be diagnosis:str, symptoms:[str], signs:[str]")
    if not all(isinstance(p, str) for p in symptoms + signs):
        raise MalformedRecord(line_number, "symptom/sign phrases must be strings")
    return DiagnosisRow(diagnosis, symptoms, signs)


def _iter_jsonl_tables(path: Path) -> Iterable[tuple[int, DiagnosisTable]]:
    with open(path, encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(line_number, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(obj, dict) or "table_id" not in obj or "rows" not in obj:
                raise MalformedRecord(line_number, "record must be an object with table_id and rows")
            rows_obj = obj["rows"]
            if not isinstance(rows_obj, list):
                raise MalformedRecord(line_number, "rows must be an array")
            rows = [_row_from_obj(r, line_number) for r in rows_obj]
            yield line_number, DiagnosisTable(str(obj["table_id"]), rows)


def _iter_csv_tables(path: Path) -> Iterable[tuple[int, DiagnosisTable]]:
    """CSV adapter: one line per table row, columns table_id, diagnosis,
    symptoms, signs with '|' separating phrases inside a cell. Rows are
    grouped by table_id in first-appearance order."""
    groups: dict[str, list[DiagnosisRow]] = {}
    first_line: dict[str, int] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"table_id", "diagnosis", "symptoms", "signs"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise MalformedRecord(1, f"CSV header must contain columns {sorted(required)}")
        for line_number, rec in enumerate(reader, start=2):
            tid = (rec.get("table_id") or "").strip()
            if not tid:
                raise MalformedRecord(line_number, "empty table_id cell")
            symptoms = [p for p in (rec.get("symptoms") or "").split("|") if p != ""]
            signs = [p for p in (rec.get("signs") or "").split("|") if p != ""]
            row = DiagnosisRow(rec.get("diagnosis") or "", symptoms, signs)
            groups.setdefault(tid, []).append(row)
            first_line.setdefault(tid, line_number)
    for tid, rows in groups.items():
        yield first_line[tid], DiagnosisTable(tid, rows)


def load_corpus(
    path: str | Path,
    fmt: str = "jsonl",
    policy: ValidationPolicy = DEFAULT_POLICY,
    source_label: str | None = None,
) -> Corpus:
    """Load and validate a corpus file, preserving table order.

    Raises FileNotFoundError, MalformedRecord (naming the offending line)
    on any error-severity violation, or DuplicateTableId.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    iterator = _iter_csv_tables(path) if fmt == "csv" else _iter_jsonl_tables(path)
    tables: list[DiagnosisTable] = []
    seen_ids: set[str] = set()
    for line_number, table in iterator:
        if table.table_id in seen_ids:
            raise DuplicateTableId(table.table_id)
        seen_ids.add(table.table_id)
        errors = [v for v in validate_table(table, policy) if v.severity == "error"]
        if errors:
            first = errors[0]
            raise MalformedRecord(line_number, f"table {table.table_id!r}: [{first.kind.value}] {first.detail}")
        tables.append(table)
    return Corpus(tables, source_label if source_label is not None else path.name)


def scan_corpus(path: str | Path, fmt: str = "jsonl", policy: ValidationPolicy = DEFAULT_POLICY) -> list[Violation]:
    """Lenient pass for the `validate` command: collect every violation
    across the file instead of stopping at the first error."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    iterator = _iter_csv_tables(path) if fmt == "csv" else _iter_jsonl_tables(path)
    out: list[Violation] = []
    seen_ids: set[str] = set()
    for _line, table in iterator:
        if table.table_id in seen_ids:
            out.append(
                Violation(ViolationKind.DUPLICATE_TABLE_ID, table.table_id, "table_id reused across records")
            )
        seen_ids.add(table.table_id)
        out.extend(validate_table(table, policy))
    return out


def table_to_record(table: DiagnosisTable) -> dict:
    return {
        "table_id": table.table_id,
        "rows": [
            {"diagnosis": r.diagnosis, "symptoms": list(r.symptoms), "signs": list(r.signs)}
            for r in table.rows
        ],
    }


def save_corpus(corpus: Corpus, path: str | Path, fmt: str = "jsonl") -> None:
    path = Path(path)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["table_id", "diagnosis", "symptoms", "signs"])
        for table in corpus.tables:
            for row in table.rows:
                for phrase in row.symptoms + row.signs:
                    if "|" in phrase:
                        raise ValueError(f"phrase {phrase!r} contains the CSV list delimiter '|'")
                writer.writerow([table.table_id, row.diagnosis, "|".join(row.symptoms), "|".join(row.signs)])
        path.write_text(buf.getvalue(), encoding="utf-8")
        return
    with open(path, "w", encoding="utf-8") as fh:
        for table in corpus.tables:
            fh.write(json.dumps(table_to_record(table), ensure_ascii=False) + "\n")


def linearize_row(index: int, row: DiagnosisRow) -> str:
    symptoms = ", ".join(row.symptoms) if row.symptoms else "none"
    signs = ", ".join(row.signs) if row.signs else "none"
    return f"Row {index} is: Diagnosis is {row.diagnosis}, Key symptoms are {symptoms}, Key signs are {signs}"


def linearize_table(table: DiagnosisTable) -> str:
    """Render the table as one string: 1-based "Row {i} is: ..." segments
    joined by "; ", list items joined by ", ", empty lists as "none"."""
    return "; ".join(linearize_row(i, row) for i, row in enumerate(table.rows, start=1))
