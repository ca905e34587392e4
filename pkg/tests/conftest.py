import numpy as np
import pytest

from permlab import available_backends


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


def example2_seed(delta):
    return 0.5 * np.array([[1 + delta, 1 - delta], [1 - delta, 1 + delta]])


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
