import numpy as np
import pytest
from hypothesis import settings, strategies as st

from trajfb.mdp import Policy

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@st.composite
def kernels(draw, max_s=4, max_a=3):
    S = draw(st.integers(1, max_s))
    A = draw(st.integers(1, max_a))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(S), size=(S, A))
    return P / P.sum(axis=-1, keepdims=True)


@st.composite
def instances(draw, max_s=4, max_a=3, max_h=4):
    """(P, r, policy, s1) with a random dense kernel and rewards in [0, 1]."""
    P = draw(kernels(max_s, max_a))
    S, A = P.shape[:2]
    H = draw(st.integers(1, max_h))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    r = rng.uniform(size=(S, A))
    pi = Policy(rng.integers(A, size=(S, H)))
    s1 = draw(st.integers(0, S - 1))
    return P, r, pi, s1


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance lines are collected here and echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
