import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> "PASS ..." / "FAIL ..." line, filled by test_acceptance
ACCEPTANCE_REPORT: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_REPORT):
        terminalreporter.write_line(ACCEPTANCE_REPORT[n])
