import pytest

from dualinspect.model import ModelParams, sample_counts
from studies import ACCEPTANCE_LINES


@pytest.fixture
def table_params():
    return ModelParams(10.0, 0.4, 0.7)


@pytest.fixture
def seeded_sample(table_params):
    return sample_counts(table_params, 500, seed=2024)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
