"""Differential-diagnosis tables to table-QA benchmark toolkit."""

from .evaluation import EvalReport, exact_match, normalize_answer, score_predictions
from .generator import (
    Dataset,
    GenerationPolicy,
    QAInstance,
    ResolvedSlot,
    SkipReason,
    dataset_stats,
    generate_dataset,
    instantiate_template,
    sample_slots,
)
from .instructions import (
    Instruction,
    PerturbationKind,
    assemble_model_input,
    budget_check,
    build_instruction,
    perturb_instruction,
    perturb_prompt,
    select_exemplar,
)
from .oracle import OracleResult, StructuredQuery, execute_query, oracle_answer, parse_question
from .splits import SplitSpec, build_split, canonical_splits, partition_tables
from .synthesis import synthetic_corpus
from .tables import (
    Corpus,
    DiagnosisRow,
    DiagnosisTable,
    ValidationPolicy,
    linearize_table,
    load_corpus,
    save_corpus,
    validate_table,
)
from .templates import SlotSpec, TemplateSpec, slot_summary, template_catalog

__version__ = "0.1.0"

__all__ = [
    "Corpus",
    "Dataset",
    "DiagnosisRow",
    "DiagnosisTable",
    "EvalReport",
    "GenerationPolicy",
    "Instruction",
    "OracleResult",
    "PerturbationKind",
    "QAInstance",
    "ResolvedSlot",
    "SkipReason",
    "SlotSpec",
    "SplitSpec",
    "StructuredQuery",
    "TemplateSpec",
    "ValidationPolicy",
    "assemble_model_input",
    "budget_check",
    "build_instruction",
    "build_split",
    "canonical_splits",
    "dataset_stats",
    "exact_match",
    "execute_query",
    "generate_dataset",
    "instantiate_template",
    "linearize_table",
    "load_corpus",
    "normalize_answer",
    "oracle_answer",
    "parse_question",
    "partition_tables",
    "perturb_instruction",
    "perturb_prompt",
    "sample_slots",
    "save_corpus",
    "score_predictions",
    "select_exemplar",
    "slot_summary",
    "synthetic_corpus",
    "template_catalog",
    "validate_table",
]
