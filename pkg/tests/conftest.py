import numpy as np
import pytest

from bdtest import BoundingFamily, FunctionTable, HypergridDomain


def random_finite_bounds(rng, n, d, lo=-4, hi=4, max_gap=4):
    """Random integer bound arrays with lower < upper everywhere."""
    lower, upper = [], []
    for _ in range(d):
        lo_row = rng.integers(lo, hi, size=n - 1)
        gap_row = rng.integers(1, max_gap + 1, size=n - 1)
        lower.append(tuple(int(v) for v in lo_row))
        upper.append(tuple(int(a + g) for a, g in zip(lo_row, gap_row)))
    return BoundingFamily(HypergridDomain(n, d), tuple(lower), tuple(upper))


def random_symmetric_bounds(rng, n, d=1, max_u=3):
    """Random positive integer bounds with lower = -upper."""
    upper = []
    for _ in range(d):
        row = rng.integers(1, max_u + 1, size=n - 1)
        upper.append(tuple(int(v) for v in row))
    lower = tuple(tuple(-v for v in row) for row in upper)
    return BoundingFamily(HypergridDomain(n, d), lower, tuple(upper))


def random_int_table(rng, n, d, vlo=0, vhi=8):
    """Integer-valued table with the declared range pinned to [vlo, vhi]."""
    domain = HypergridDomain(n, d)
    values = tuple(int(v) for v in rng.integers(vlo, vhi + 1, size=domain.size))
    return FunctionTable(domain, values, (vlo, vhi))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
