import os

import pytest

import sosforge
from sosforge.syntax import load, term_for

CORPUS = os.path.join(os.path.dirname(sosforge.__file__), "corpus")


def corpus_path(name):
    return os.path.join(CORPUS, name)


@pytest.fixture(scope="session")
def corpus():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = load(corpus_path(name))
        return cache[name]
    return get


@pytest.fixture(scope="session")
def seq(corpus):
    return corpus("sequencing.tss")


@pytest.fixture(scope="session")
def prio(corpus):
    return corpus("priority.tss")


@pytest.fixture
def T():
    """Parse closed or open terms against a TSS's signature."""
    return lambda P, *texts: [term_for(P, s) for s in texts] if len(texts) > 1 else term_for(P, texts[0])


ACCEPTANCE = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def record(n, ok, detail):
        line = "%s criterion %d: %s" % ("PASS" if ok else "FAIL", n, detail)
        ACCEPTANCE.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
