import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from kirchnorm.grid import default_grid, field_from_function, make_grid  # noqa: E402


@pytest.fixture(scope="session")
def grid1():
    return default_grid(1)


@pytest.fixture(scope="session")
def gauss1(grid1):
    """Unit-mass Gaussian pi^{-1/4} exp(-x^2/2)."""
    return field_from_function(grid1, lambda x: np.pi**-0.25 * np.exp(-x * x / 2.0))


@pytest.fixture(scope="session")
def fine_p12_grid():
    """Resolves the narrow p = 12 profile (width ~ 0.07)."""
    return make_grid(1, 2.5, 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
