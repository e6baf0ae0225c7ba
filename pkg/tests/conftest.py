import pytest

ACCEPTANCE_LINES: dict[int, str] = {}


class CriterionRecorder:
    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.checks: list[tuple[str, bool]] = []

    def check(self, label: str, ok) -> bool:
        self.checks.append((label, bool(ok)))
        return bool(ok)

    def finish(self) -> None:
        ok = all(passed for _, passed in self.checks)
        detail = "; ".join(f"{label}{'' if passed else ' [FAILED]'}" for label, passed in self.checks)
        line = f"criterion {self.number:>2} {'PASS' if ok else 'FAIL'}  {self.title}: {detail}"
        ACCEPTANCE_LINES[self.number] = line
        print(line)
        assert ok, line


@pytest.fixture
def criterion():
    def make(number: int, title: str) -> CriterionRecorder:
        return CriterionRecorder(number, title)
    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
