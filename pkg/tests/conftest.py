import pytest

from biotabqa.synthesis import synthetic_corpus
from biotabqa.tables import Corpus, DiagnosisRow, DiagnosisTable


@pytest.fixture
def headache_table() -> DiagnosisTable:
    return DiagnosisTable(
        "headaches",
        [
            DiagnosisRow(
                "Migraine",
                ["unilateral headache", "nausea", "photophobia"],
                ["normal examination"],
            ),
            DiagnosisRow(
                "Tension headache",
                ["bilateral headache", "nausea"],
                ["pericranial tenderness"],
            ),
        ],
    )


@pytest.fixture
def headache_corpus(headache_table) -> Corpus:
    return Corpus([headache_table])


@pytest.fixture(scope="session")
def small_corpus() -> Corpus:
    return synthetic_corpus(6, seed=3)
