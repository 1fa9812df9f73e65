import numpy as np
import pytest

from annulus_euler.boundary import BoundaryData
from annulus_euler.fields import AnnulusGrid, BoundaryFunction


def unit_data():
    """One unit-amplitude low mode per datum; scaled by eps in the tests."""
    return BoundaryData(
        f0=BoundaryFunction(0.0, [1.0]),
        f1=BoundaryFunction(0.0, [1.0]),
        b0=BoundaryFunction(0.0, [], [1.0]),
        p0=BoundaryFunction(0.0, [], [1.0]),
        p1=BoundaryFunction(0.0, [1.0]),
        T_shift=BoundaryFunction(0.0, [], [1.0]),
        j0=1.0,
    )


@pytest.fixture
def grid():
    return AnnulusGrid(1.0, 2.0, 33, 64)


@pytest.fixture
def grid64():
    return AnnulusGrid(1.0, 2.0, 65, 128)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


CRITERIA = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, ok, detail)``; asserts ``ok``."""

    def record(number, ok, detail):
        CRITERIA[number] = (bool(ok), detail)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, f"criterion {number}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})")
