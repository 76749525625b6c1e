import pytest

from qhm import ktheory
from qhm.core import QhmParams

# criterion number -> (passed, detail), filled in by test_acceptance.py
ACCEPTANCE_LINES: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def params():
    return QhmParams()


@pytest.fixture(scope="session")
def units(params):
    return ktheory.build_unitaries(params)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        ok, detail = ACCEPTANCE_LINES[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
