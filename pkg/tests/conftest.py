import sys
from importlib.resources import files
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from weakdist.automata import determinize_once, parse_alt, parse_pa  # noqa: E402
from weakdist.equiv import parse_relation  # noqa: E402

settings.register_profile("default", max_examples=150, deadline=None)
settings.load_profile("default")

CORPUS = files("weakdist") / "corpus"


def corpus(name):
    return (CORPUS / name).read_text()


@pytest.fixture(scope="session")
def c0():
    return parse_alt(corpus("c0.alt"))


@pytest.fixture(scope="session")
def c0_nda(c0):
    return determinize_once(c0)


@pytest.fixture(scope="session")
def c0_pa():
    return parse_pa(corpus("c0.pa"))


@pytest.fixture(scope="session")
def r0():
    return parse_relation(corpus("r0.rel"))


@pytest.fixture(scope="session")
def r7():
    return parse_relation(corpus("r7.rel"))


@pytest.fixture(scope="session")
def r0_convex():
    return parse_relation(corpus("r0_convex.rel"))


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
