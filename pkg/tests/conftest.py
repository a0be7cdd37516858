import math

import numpy as np
import pytest

from normkam.series import FourierTaylorSeries, make_series

GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0
GOLDEN_GAMMA0 = 2.0 * math.pi * GOLDEN_MEAN


@pytest.fixture(scope="session")
def golden_gamma0():
    return GOLDEN_GAMMA0


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


def random_series(rng, freq=(1.0,), order_max=6, cutoff=5, n_terms=8,
                  order_min=0, mode_max=None, scale=1.0):
    """Random reality-symmetric series (symmetrization happens in make_series)."""
    mode_max = cutoff if mode_max is None else mode_max
    entries = {}
    for _ in range(n_terms):
        k = int(rng.integers(order_min, order_max + 1))
        j = int(rng.integers(-mode_max, mode_max + 1))
        entries[(k, j)] = complex(rng.normal(), rng.normal()) * scale
    return make_series(freq, entries, order_max, cutoff)


@pytest.fixture()
def small_series(rng):
    return random_series(rng)


def series_equal(a, b, atol=0.0):
    if atol == 0.0:
        return np.array_equal(a.coefficients, b.coefficients)
    return np.allclose(a.coefficients, b.coefficients, rtol=0.0, atol=atol)
