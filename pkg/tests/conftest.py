from __future__ import annotations

import pytest

from specimeta.fixtures import CorpusSpec, generate
from specimeta.pipeline import default_rules_dir, load_rules_dir, run_pipeline

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def corpus_inputs(corpus) -> dict[str, bytes]:
    return {name: getattr(corpus, name) for name in corpus.SOURCES}


@pytest.fixture(scope="session")
def rules():
    return load_rules_dir(default_rules_dir())


@pytest.fixture(scope="session")
def small_corpus():
    return generate(CorpusSpec(record_count=30, seed=7))


@pytest.fixture(scope="session")
def small_graph(small_corpus, rules):
    return run_pipeline(corpus_inputs(small_corpus), rules).graph


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
