import numpy as np
import pytest

from walkim import InfluenceGraph, random_graph


def make_graph(edges, n=None, labels=None):
    """Graph from [(u, v, p), ...] tuples with internal ids."""
    if edges:
        s, t, p = zip(*edges)
    else:
        s, t, p = [], [], []
    if n is None:
        n = max([max(s), max(t)]) + 1 if edges else 0
    return InfluenceGraph(n, s, t, p, labels=labels)


def guarded_graph(seed, n_lo=4, n_hi=8, m_lo=4, m_hi=12, p_lo=0.1, p_hi=0.6):
    """Small random instance inside the enumeration guards."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_lo, n_hi + 1))
    max_m = n * (n - 1)
    m = int(rng.integers(m_lo, min(m_hi, max_m) + 1))
    return random_graph(n, m, int(rng.integers(0, 2**31)),
                        p_low=p_lo, p_high=p_hi)


@pytest.fixture
def chain_graph():
    # a -> b -> c with p = 0.5 on both edges
    return make_graph([(0, 1, 0.5), (1, 2, 0.5)])


@pytest.fixture
def diamond_graph():
    # a -> x -> b and a -> y -> b, all p = 0.5
    return make_graph([(0, 1, 0.5), (0, 2, 0.5), (1, 3, 0.5), (2, 3, 0.5)])
