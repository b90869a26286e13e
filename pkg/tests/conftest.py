"""Shared pytest wiring: replay acceptance verdict lines after the run.

Plain stdout from passing tests is captured and discarded, so the
acceptance module records its per-criterion verdict lines here and this
hook writes them into the terminal summary where `pytest -v` shows them.
"""

verdict_lines = []


def pytest_terminal_summary(terminalreporter):
    for line in verdict_lines:
        terminalreporter.write_line(line)
