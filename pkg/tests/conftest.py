import numpy as np
import pytest
from hypothesis import settings

from fracwave.core import make_params

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

ASYMMETRIC_P = (0.2, 0.4, 0.8)


@pytest.fixture(params=ASYMMETRIC_P)
def asym(request):
    return make_params(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
