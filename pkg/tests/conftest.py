import pytest

from lattes.core import MarkedPoint, lift
from lattes.parse import parse_marked_point

SUITE_TEXT = ["2", "3", "-1", "1/2", "t+2", "(t+1)/(t-3)"]


@pytest.fixture(scope="session")
def suite():
    return [lift(parse_marked_point(s)) for s in SUITE_TEXT]


@pytest.fixture(scope="session")
def a2():
    return lift(MarkedPoint.constant(2))


@pytest.fixture(scope="session")
def a3():
    return lift(MarkedPoint.constant(3))


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
