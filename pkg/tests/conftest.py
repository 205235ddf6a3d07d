import itertools

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from fskq.symmetry import canonicalize_generator

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def brute_orbit(values):
    """Every signed permutation of ``values``, as a set of tuples."""
    d = len(values)
    out = set()
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1.0, -1.0), repeat=d):
            out.add(tuple(s * values[p] + 0.0 for s, p in zip(signs, perm)))
    return out


def as_point_set(points):
    # adding 0.0 turns -0.0 into 0.0 so tuples compare as intended
    return {tuple(float(v) + 0.0 for v in p) for p in np.asarray(points)}


@st.composite
def generators(draw, min_dim=1, max_dim=4, pool=(0.0, 0.25, 0.5, 1.0, 1.5, 2.0)):
    """Canonical generators whose entries come from a small pool, so zeros and repeats are common."""
    d = draw(st.integers(min_dim, max_dim))
    use_pool = draw(st.booleans())
    if use_pool:
        vals = draw(st.lists(st.sampled_from(pool), min_size=d, max_size=d))
    else:
        vals = draw(st.lists(st.floats(0.0, 3.0, allow_nan=False), min_size=d, max_size=d))
    return canonicalize_generator(vals)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def report_criterion(number, passed, detail, gating=True):
    status = "PASS" if passed else "FAIL"
    if not gating:
        status = "INFO"
    line = f"[{status}] criterion {number}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
