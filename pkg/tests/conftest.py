import time

import numpy as np
import pytest

from qdelaunay import make_params, shoot, sweep


@pytest.fixture(scope="session")
def p5():
    return make_params(5)


@pytest.fixture(scope="session")
def p6():
    return make_params(6)


@pytest.fixture(scope="session")
def orbit09(p5):
    return shoot(p5, 0.9)


@pytest.fixture(scope="session")
def acceptance_sweep(p5):
    """The 20-point family on [0.84, 0.99] plus its wall-clock cost."""
    t0 = time.perf_counter()
    report = sweep(p5, np.linspace(0.84, 0.99, 20))
    return report, time.perf_counter() - t0
