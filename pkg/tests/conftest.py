from fractions import Fraction

import numpy as np
import pytest

from degradecost.channel import Channel
from degradecost.hard import HardChannelSpec, build_hard_channel

ACCEPTANCE_LINES: list[str] = []


def random_channel(rng, q=None, n=None, uniform=False, zero_cols=False):
    q = int(rng.integers(2, 5)) if q is None else q
    n = int(rng.integers(1, 9)) if n is None else n
    W = rng.dirichlet(np.ones(n) * rng.choice([0.3, 1.0, 3.0]), size=q)
    if zero_cols and n > 1:
        W[:, int(rng.integers(n))] = 0.0
        W /= W.sum(axis=1, keepdims=True)
    px = np.full(q, 1.0 / q) if uniform else rng.dirichlet(np.ones(q))
    return Channel(W, px)


def random_partition_blocks(rng, n, max_blocks=None):
    k = int(rng.integers(1, (max_blocks or n) + 1))
    labels = rng.integers(0, k, size=n)
    return [np.flatnonzero(labels == b).tolist() for b in np.unique(labels)]


@pytest.fixture
def w2():
    """W_M with q = 2, M = 2: outputs (2,0), (1,1), (0,2)."""
    return build_hard_channel(HardChannelSpec(2, 2))


@pytest.fixture
def identity2():
    return Channel([[1, 0], [0, 1]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def half():
    return Fraction(1, 2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
