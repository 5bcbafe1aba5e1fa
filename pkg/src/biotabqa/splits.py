"""The three canonical 17/5 task splits, plus table partitioning and
split materialization (train / in-domain test / cross-task test)."""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from .errors import DegeneratePartition
from .generator import Dataset, GenerationPolicy, GenerationReport, StatsReport, dataset_stats, generate_dataset
from .tables import Corpus

ALL_TASKS = frozenset(range(1, 23))

# Cross-task evaluation sets; train sets are the complements.
CANONICAL_CROSS_TASKS: dict[int, frozenset[int]] = {
    1: frozenset({1, 4, 7, 15, 21}),
    2: frozenset({8, 9, 11, 12, 14}),
    3: frozenset({1, 3, 15, 16, 17}),
}


@dataclass(frozen=True)
class SplitSpec:
    name: str
    train_tasks: frozenset[int]
    cross_tasks: frozenset[int]
    table_train_fraction: float = 1 / 3
    partition_seed: int = 0
    cross_table_source: str = "test-tables"  # train-tables | test-tables | all-tables

    def __post_init__(self):
        if self.train_tasks | self.cross_tasks != ALL_TASKS or self.train_tasks & self.cross_tasks:
            raise ValueError("train and cross tasks must partition 1..22")
        if len(self.train_tasks) != 17 or len(self.cross_tasks) != 5:
            raise ValueError("splits are 17 train tasks / 5 cross tasks")
        if not 0 < self.table_train_fraction < 1:
            raise ValueError("table_train_fraction must lie in (0, 1)")
        if self.cross_table_source not in ("train-tables", "test-tables", "all-tables"):
            raise ValueError(f"unknown cross_table_source {self.cross_table_source!r}")


@dataclass(frozen=True)
class SplitDatasets:
    spec: SplitSpec
    train: Dataset
    iid_test: Dataset
    cross_test: Dataset
    table_partition: tuple[tuple[str, ...], tuple[str, ...]]
    stats: dict[str, StatsReport]
    reports: dict[str, GenerationReport]


def canonical_splits() -> list[SplitSpec]:
    return [
        SplitSpec(
            name=f"split{n}",
            train_tasks=ALL_TASKS - cross,
            cross_tasks=cross,
        )
        for n, cross in sorted(CANONICAL_CROSS_TASKS.items())
    ]


def canonical_split(number: int) -> SplitSpec:
    if number not in CANONICAL_CROSS_TASKS:
        raise ValueError(f"canonical split must be 1, 2 or 3, got {number}")
    return canonical_splits()[number - 1]


def partition_tables(corpus: Corpus, fraction: float, seed: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Disjoint, exhaustive table split with |train| = round(fraction * N),
    deterministic per seed. Raises DegeneratePartition when a side would
    be empty."""
    if not corpus.tables:
        raise DegeneratePartition("corpus has no tables")
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    ids = sorted(corpus.table_ids())
    n_train = int(fraction * len(ids) + 0.5)
    if n_train == 0 or n_train == len(ids):
        raise DegeneratePartition(
            f"fraction {fraction} over {len(ids)} tables leaves an empty side"
        )
    shuffled = list(ids)
    random.Random(seed).shuffle(shuffled)
    train = tuple(sorted(shuffled[:n_train]))
    test = tuple(sorted(shuffled[n_train:]))
    return train, test


def _subcorpus(corpus: Corpus, table_ids: set[str], label: str) -> Corpus:
    return Corpus([t for t in corpus.tables if t.table_id in table_ids], source_label=label)


def build_split(
    corpus: Corpus,
    spec: SplitSpec,
    policy: GenerationPolicy,
    jobs: int = 1,
) -> SplitDatasets:
    """Materialize train / iid_test / cross_test. Train tables and test
    tables never overlap; cross-task tables come from
    spec.cross_table_source."""
    train_ids, test_ids = partition_tables(corpus, spec.table_train_fraction, spec.partition_seed)
    cross_ids = {
        "train-tables": train_ids,
        "test-tables": test_ids,
        "all-tables": train_ids + test_ids,
    }[spec.cross_table_source]
    train, train_report = generate_dataset(
        _subcorpus(corpus, set(train_ids), "train-tables"), spec.train_tasks, policy, jobs
    )
    iid_test, iid_report = generate_dataset(
        _subcorpus(corpus, set(test_ids), "test-tables"), spec.train_tasks, policy, jobs
    )
    cross_test, cross_report = generate_dataset(
        _subcorpus(corpus, set(cross_ids), "cross-tables"), spec.cross_tasks, policy, jobs
    )
    return SplitDatasets(
        spec=spec,
        train=train,
        iid_test=iid_test,
        cross_test=cross_test,
        table_partition=(train_ids, test_ids),
        stats={
            "train": dataset_stats(train),
            "iid_test": dataset_stats(iid_test),
            "cross_test": dataset_stats(cross_test),
        },
        reports={"train": train_report, "iid_test": iid_report, "cross_test": cross_report},
    )


def spec_to_dict(spec: SplitSpec) -> dict:
    return {
        "name": spec.name,
        "train_tasks": sorted(spec.train_tasks),
        "cross_tasks": sorted(spec.cross_tasks),
        "table_train_fraction": spec.table_train_fraction,
        "partition_seed": spec.partition_seed,
        "cross_table_source": spec.cross_table_source,
    }


def configured_split(
    number: int,
    fraction: float | None = None,
    seed: int | None = None,
    cross_table_source: str | None = None,
) -> SplitSpec:
    spec = canonical_split(number)
    updates = {}
    if fraction is not None:
        updates["table_train_fraction"] = fraction
    if seed is not None:
        updates["partition_seed"] = seed
    if cross_table_source is not None:
        updates["cross_table_source"] = cross_table_source
    return replace(spec, **updates) if updates else spec
