import numpy as np
import pytest

ACCEPTANCE_LOG: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def crandn(rng, rows, cols):
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
