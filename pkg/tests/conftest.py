import os
import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from extremal_dare.builtin import builtin_example

settings.register_profile("dare", deadline=None, max_examples=int(os.environ.get("DARE_EXAMPLES", "30")),
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("dare")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=["ex1", "ex2", "ex4"])
def example(request):
    return builtin_example(request.param)


def rel(x, y):
    return np.linalg.norm(x - y, 2) / np.linalg.norm(y, 2)
