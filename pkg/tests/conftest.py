import numpy as np
import pytest

from qlls.designs import clifford_design, icosahedral_design

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def clifford():
    return clifford_design()


@pytest.fixture(scope="session")
def icosahedral():
    return icosahedral_design()


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def report():
    """Record one pass/fail line for the acceptance summary."""

    def _report(criterion: str, ok: bool, detail: str) -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
