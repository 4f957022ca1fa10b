import sys
from pathlib import Path

import pytest

from defitex.corpus_ingest import scan_corpus
from defitex.dataset_builder import build_examples
from defitex.pipeline import extract_paper

TESTS = Path(__file__).resolve().parent
FIXTURES = TESTS / "fixtures"
CORPUS = FIXTURES / "corpus"
METADATA = FIXTURES / "metadata.tsv"

sys.path.insert(0, str(TESTS))

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def manifest():
    return scan_corpus(CORPUS, METADATA)


@pytest.fixture(scope="session")
def records(manifest):
    out = []
    for entry in manifest.entries:
        out.extend(extract_paper(entry))
    return out


@pytest.fixture(scope="session")
def examples(records):
    kept, dropped = build_examples(records)
    assert dropped == 0
    return kept


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
