import numpy as np
import pytest
from hypothesis import strategies as st

from posinormal.numkernel import ToleranceConfig


@pytest.fixture
def tol():
    return ToleranceConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def complex_matrices(max_n=8, square=True):
    """Random complex matrices, optionally rank-deficient via thin factors."""

    @st.composite
    def build(draw):
        m = draw(st.integers(1, max_n))
        n = m if square else draw(st.integers(1, max_n))
        seed = draw(st.integers(0, 2**32 - 1))
        rng = np.random.default_rng(seed)
        r = draw(st.integers(0, min(m, n)))
        L = rng.standard_normal((m, r)) + 1j * rng.standard_normal((m, r))
        R = rng.standard_normal((r, n)) + 1j * rng.standard_normal((r, n))
        return L @ R

    return build()


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(VERDICTS):
            terminalreporter.write_line(VERDICTS[number])
