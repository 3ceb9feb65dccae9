import csv
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).resolve().parent / "fixtures"


@pytest.fixture(scope="session")
def derived() -> dict[str, float]:
    with open(FIXTURES / "derived.csv") as fh:
        return {row["name"]: float(row["value"]) for row in csv.DictReader(fh)}


@pytest.fixture(scope="session")
def farima_table() -> dict[float, np.ndarray]:
    data = np.loadtxt(FIXTURES / "farima_autocov.csv", delimiter=",", skiprows=1)
    return {d: data[:, j + 1] for j, d in enumerate((-0.2, 0.1, 0.2, 0.35))}


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def record(line: str) -> None:
        print(line)
        _ACCEPTANCE_LINES.append(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
