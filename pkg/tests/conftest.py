import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """Record one verdict line per acceptance criterion.

    Lines are printed together in the terminal summary so they survive output
    capture and land in the saved test log.
    """
    lines = request.config.stash[_ACCEPTANCE]

    def record(criterion: str, passed: bool, detail: str = "", label: str = ""):
        verdict = label or ("PASS" if passed else "FAIL")
        lines.append(f"ACCEPTANCE {verdict:<5} {criterion}: {detail}")
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
    failed = sum(1 for line in lines if line.startswith("ACCEPTANCE FAIL"))
    graded = sum(1 for line in lines if line.split()[1] in ("PASS", "FAIL"))
    terminalreporter.write_line(f"ACCEPTANCE TOTAL {graded - failed}/{graded} criteria passed")
