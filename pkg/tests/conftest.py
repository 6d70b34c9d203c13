import pytest

from memweave.corpus import builtin_corpus, corpus_test
from memweave.explore import enumerate_outcomes
from memweave.parser import parse_litmus


def outcomes(model, test, **kw):
    return enumerate_outcomes(model, test.program, observed=test.observed, **kw)


def regs(outs, *keys):
    """Project outcomes onto ``("P1", "r1")``-style register keys."""
    return {tuple(o.reg(t, r) for t, r in keys) for o in outs}


def litmus(src):
    return parse_litmus(src)


SB_SRC = r"""
test SB
init { a=0, b=0 }
thread P1 { St a 1; r1 = Ld b }
thread P2 { St b 1; r2 = Ld a }
exists (P1.r1 = 0 /\ P2.r2 = 0)
"""


@pytest.fixture
def sb():
    return parse_litmus(SB_SRC)


@pytest.fixture(scope="session")
def corpus():
    return builtin_corpus()


@pytest.fixture
def get():
    return corpus_test


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
