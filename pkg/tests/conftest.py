"""Shared fixtures and the acceptance summary hook."""
import numpy as np
import pytest

from assouad.instances import line_instance
from assouad.metric import validate_metric

ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


@pytest.fixture
def pair_space():
    """Two points at distance 1."""
    return validate_metric(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def line10():
    """Integer points 0..9 on the real line."""
    return line_instance(10)
