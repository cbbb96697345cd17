import pytest

from bfpp.witness import construct

ACCEPTANCE_STAGES = 50
ACCEPTANCE_CAP = 10**5

# criterion number -> (passed, summary line); filled in by test_acceptance
ACCEPTANCE_RESULTS: dict = {}


@pytest.fixture(scope="session")
def small_history():
    """Six stages: Inserted stages with k = 9, 67, 313 and 3129 plus two Disjoint ones."""
    return construct(6, 10**4)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, line = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {line}")
