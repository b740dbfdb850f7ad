import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fdverify import load  # noqa: E402
from fdverify.harness import corpus_source  # noqa: E402

CORPUS_FILES = [
    "tritype.mimp", "tritypeKO.mimp", "binarySearch.mimp", "binarySearchKO.mimp",
    "bubbleSort.mimp", "squareSum.mimp", "squareSumArray.mimp", "selectionSort.mimp",
]


def corpus_text(name: str) -> str:
    return corpus_source(name)


def program(name: str, function=None):
    return load(corpus_text(name), function)


@pytest.fixture
def corpus():
    return program


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
