from pathlib import Path

import numpy as np
import pytest

from curstat.data import RngSpec, read_sample_csv
from curstat.sim import sample_model

DATA = Path(__file__).parent / "data"

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def sero_csv():
    return DATA / "seroprevalence_synthetic.csv"


@pytest.fixture
def sero_sample(sero_csv):
    return read_sample_csv(sero_csv)


@pytest.fixture
def uniform_sample():
    return sample_model("uniform2", 1000, RngSpec(11))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
