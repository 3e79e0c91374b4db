import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from _criteria import RESULTS  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in RESULTS:
        terminalreporter.write_line(line)
