import sys

import numpy as np
import pytest

from jpairs.structures import R90


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def c_plus_cbar():
    """J0 = R + R and J1 = R + (-R) on R^4: one holomorphic, one antiholomorphic line."""
    Z = np.zeros((2, 2))
    J0 = np.block([[R90, Z], [Z, R90]])
    J1 = np.block([[R90, Z], [Z, -R90]])
    return J0, J1



def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance lines at the end of the run."""
    module = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
