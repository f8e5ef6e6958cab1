import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

#: (criterion, passed, detail) lines reported by the acceptance suite.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(ACCEPTANCE_LINES, key=lambda l: int(l[0].split()[1])):
        terminalreporter.write_line(f"{name}: {status} {detail}")
