"""Pytest hooks: print one pass/fail line per acceptance criterion."""

CRITERION_LINES = []


def record_criterion(number, label, elapsed, passed=True):
    status = "PASS" if passed else "FAIL"
    CRITERION_LINES.append(
        f"[{status}] criterion {number}: {label} ({elapsed:.2f} s)"
    )


def pytest_terminal_summary(terminalreporter):
    if CRITERION_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERION_LINES):
            terminalreporter.write_line(line)
