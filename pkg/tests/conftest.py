import numpy as np
import pytest

from nlolim.eigensolver import GridSpec, PotentialSpec, solve_nonrel, spectrum_from_eigensystem

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def ho_system():
    return solve_nonrel(PotentialSpec.harmonic(1.0), GridSpec(-10, 10, 2001), 30)


@pytest.fixture(scope="session")
def ho_spectrum(ho_system):
    return spectrum_from_eigensystem(ho_system)


@pytest.fixture(scope="session")
def box_system():
    return solve_nonrel(PotentialSpec.box(np.pi), None, 200)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
