"""Synthetic sample corpus. The real differential-diagnosis source is a
copyrighted textbook, so the shipped corpus is generated: invented
condition names with adjective+noun symptom and sign phrases. Phrase
vocabulary deliberately avoids the template delimiter words ("and",
"but", "no", "not") and punctuation so generated questions stay
parseable."""

from __future__ import annotations

from .seeding import derived_rng
from .tables import Corpus, DiagnosisRow, DiagnosisTable

_CONDITION_PREFIXES = (
    "Alvi", "Brimo", "Candra", "Dorel", "Eskal", "Fenra", "Galdo", "Hestri",
    "Ilvane", "Jorma", "Kelva", "Lumbra", "Morvel", "Nestra", "Ostel", "Prandu",
)
_CONDITION_SUFFIXES = ("dosis", "pathy", "lemia", "tritis", "plegia", "rrhexis")

_SYMPTOM_ADJECTIVES = (
    "dull", "sharp", "mild", "severe", "burning", "throbbing", "persistent",
    "intermittent", "sudden", "gradual", "recurrent", "fluctuating",
)
_SYMPTOM_NOUNS = (
    "headache", "cough", "rash", "fatigue", "fever", "nausea", "cramping",
    "dizziness", "tremor", "itching", "stiffness", "swelling", "numbness",
    "wheezing", "palpitations", "sweats",
)
_SIGN_ADJECTIVES = ("elevated", "reduced", "irregular", "tender", "enlarged", "pale", "rigid", "asymmetric")
_SIGN_NOUNS = ("pulse", "reflexes", "abdomen", "temperature", "gait", "pupils", "posture", "breathing")


def _phrases(adjectives, nouns) -> list[str]:
    return [f"{a} {n}" for a in adjectives for n in nouns]


SYMPTOM_POOL = _phrases(_SYMPTOM_ADJECTIVES, _SYMPTOM_NOUNS)
SIGN_POOL = _phrases(_SIGN_ADJECTIVES, _SIGN_NOUNS)
CONDITION_POOL = [p + s for p in _CONDITION_PREFIXES for s in _CONDITION_SUFFIXES]


def synthetic_corpus(
    n_tables: int,
    seed: int = 0,
    rows_per_table: tuple[int, int] = (3, 6),
    symptoms_per_row: tuple[int, int] = (4, 6),
    signs_per_row: tuple[int, int] = (2, 4),
) -> Corpus:
    """Deterministic per seed. Table ids are zero-padded so lexicographic
    and numeric order coincide."""
    if n_tables < 1:
        raise ValueError("n_tables must be >= 1")
    width = max(3, len(str(n_tables - 1)))
    tables = []
    for index in range(n_tables):
        rng = derived_rng(seed, "table", index)
        n_rows = rng.randint(*rows_per_table)
        diagnoses = rng.sample(CONDITION_POOL, n_rows)
        # A shared per-table sub-pool makes symptom overlap across rows
        # likely, which exercises ambiguity handling downstream.
        table_symptoms = rng.sample(SYMPTOM_POOL, min(len(SYMPTOM_POOL), n_rows * 4))
        table_signs = rng.sample(SIGN_POOL, min(len(SIGN_POOL), n_rows * 3))
        rows = []
        for diagnosis in diagnoses:
            n_sym = rng.randint(*symptoms_per_row)
            n_sign = rng.randint(*signs_per_row)
            rows.append(
                DiagnosisRow(
                    diagnosis=diagnosis,
                    symptoms=rng.sample(table_symptoms, min(n_sym, len(table_symptoms))),
                    signs=rng.sample(table_signs, min(n_sign, len(table_signs))),
                )
            )
        tables.append(DiagnosisTable(f"t{index:0{width}d}", rows))
    return Corpus(tables, source_label=f"synthetic(seed={seed}, n={n_tables})")
