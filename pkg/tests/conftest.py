"""Echo acceptance-criterion verdict lines after the test run.

The acceptance tests record one "[CRITERION nn] ...: PASS/FAIL" line each;
pytest's fd-level capture would otherwise hide them on success, so they are
re-emitted here through the terminal reporter.
"""

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for name, mod in sys.modules.items():
        if name.rpartition(".")[2] == "test_acceptance":
            lines = getattr(mod, "REPORT_LINES", [])
            break
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
