import sys

import numpy as np
import pytest

from breitrabi.hamiltonian import preset


@pytest.fixture(scope="session")
def hydrogen():
    return preset("hydrogen")


@pytest.fixture(scope="session")
def sodium():
    return preset("sodium")


@pytest.fixture(scope="session")
def pedagogical():
    return preset("pedagogical")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
