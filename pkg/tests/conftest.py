import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_state(d, rng, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ball_point(rng, radius=1.0):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return v * radius * rng.uniform() ** (1.0 / 3.0)


def random_mic_angles(rng, margin=0.05):
    delta = rng.uniform(margin, math.pi / 2 - margin)
    alpha = rng.uniform(-math.pi / 2 + margin, math.pi / 2 - margin)
    return delta, alpha


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


mic_delta = st.floats(0.05, math.pi / 2 - 0.05)
mic_alpha = st.floats(-math.pi / 2 + 0.05, math.pi / 2 - 0.05)
bloch_vector = st.tuples(
    st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1)
).filter(lambda v: 1e-6 < sum(x * x for x in v) <= 1.0)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
