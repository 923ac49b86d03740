from pathlib import Path

ACCEPTANCE_LINES: list[str] = []

ARTIFACT_DIR = Path(__file__).resolve().parent.parent / "artifacts" / "acceptance"


def record_criterion(index: int, description: str, ok: bool, detail: str = "") -> bool:
    line = f"[criterion {index:>2}] {'PASS' if ok else 'FAIL'}  {description}"
    if detail:
        line += f"  |  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
