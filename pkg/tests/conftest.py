import pytest

from streamprod import fixtures
from streamprod.parser import parse_term
from streamprod.streamspec import extend_with_overflow, unfold

BASIC = [n for n in fixtures.names() if n not in fixtures.RAW]


@pytest.fixture(scope="session")
def specs():
    return {n: unfold(fixtures.spec(n)) for n in fixtures.names()}


def T(spec, text):
    return parse_term(text, spec)


def load(name):
    return unfold(fixtures.spec(name))


def extended(name):
    return extend_with_overflow(load(name))


# lines recorded by the acceptance module, printed once at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
