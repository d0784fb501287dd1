"""Shared pytest hooks.

The acceptance tests push their PASS/FAIL verdict lines here so they are
printed after the run, outside pytest's output capture.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
