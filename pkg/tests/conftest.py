import numpy as np
import pytest

_ACCEPTANCE: list[str] = []

from sqsflow.core import Grid, PhysicalConstants


@pytest.fixture
def line():
    return Grid.line(-12.0, 12.0, 512)


@pytest.fixture
def units():
    return PhysicalConstants(1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion; printed in the terminal summary."""

    def record(criterion: str, passed: bool, detail: str) -> bool:
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE.append(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: (int(s.split()[1].rstrip(":").rstrip("abcdefgh")), s)):
            terminalreporter.write_line(line)
