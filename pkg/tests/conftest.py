import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile(
    "ncdist", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ncdist")


def weights(min_size=1, max_size=11, lo=0.1, hi=10.0):
    """Positive edge weights drawn log-uniformly in [lo, hi]."""
    logs = st.floats(np.log(lo), np.log(hi), allow_nan=False)
    return st.lists(logs, min_size=min_size, max_size=max_size).map(lambda v: np.exp(v))


def nonneg(size):
    return arrays(np.float64, size, elements=st.floats(0.0, 1.0, allow_nan=False))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
