"""Shared pytest plumbing: the acceptance-criteria summary block."""

ACCEPTANCE_LINES: list[str] = []


def record_criterion(num: int, title: str, ok: bool, elapsed: float, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"criterion {num} ({title}): {status} in {elapsed:.2f} s"
    if detail:
        line += f" [{detail}]"
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter) -> None:
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
