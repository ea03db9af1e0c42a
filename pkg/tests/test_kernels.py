"""numba and numpy kernels must agree exactly (floats where noted)."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from digitlaw import kernels
from digitlaw._accel import HAVE_NUMBA

pytestmark = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")

NB, NP = 0, 1


def both(name, *args):
    fn = kernels.KERNELS[name]
    return fn[NB](*args), fn[NP](*args)


@given(st.lists(st.integers(0, 9), min_size=1, max_size=500), st.integers(0, 10 ** 12))
def test_scan_prefix(digits, n0):
    arr = np.array(digits, dtype=np.uint8)
    (s1, d1), (s2, d2) = both("scan_prefix", arr, n0, 4 * n0, 9, np.sqrt(8.25))
    assert np.array_equal(s1, s2)
    assert np.array_equal(d1, d2)


@given(st.lists(st.floats(-5, 5), max_size=500), st.sampled_from([0.1, 0.025]))
def test_hist_counts(values, step):
    nb = round(6 / step)
    edges = (-3.0 * nb + np.arange(nb + 1) * 6.0) / nb
    a, b = both("hist_counts", np.array(values, dtype=np.float64), edges)
    assert np.array_equal(a, b)


def test_hist_counts_on_edges():
    edges = (-3.0 * 60 + np.arange(61) * 6.0) / 60
    values = np.concatenate([edges, np.nextafter(edges, 10), np.nextafter(edges, -10)])
    a, b = both("hist_counts", values, edges)
    assert np.array_equal(a, b)


@settings(max_examples=60)
@given(st.lists(st.sampled_from([-1.0, 0.0, 0.5, 1.0, 2.0]), min_size=1, max_size=300),
       st.integers(0, 1000), st.integers(1, 50), st.integers(1, 50))
def test_envelope(values, n0, block, per_block):
    per_block = min(per_block, block)
    a, b = both("envelope", np.array(values), n0, block, per_block)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@given(st.lists(st.integers(0, 5), min_size=4, max_size=400), st.integers(1, 4))
def test_pattern_counts(digits, k):
    a, b = both("pattern_counts", np.array(digits, dtype=np.uint8), 6, k)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("n", [0, 1, 7, 1000, 54321])
@pytest.mark.parametrize("j", [1, 4, 5, 6])
def test_bbp_series(n, j):
    a, b = both("bbp_series", n, j)
    # summation order differs, so rounding error of order n * eps is allowed
    tol = 1e-13 + 4e-16 * n
    diff = abs(a - b)
    assert min(diff, 1 - diff) < tol


def test_pi_spigot():
    a, b = both("pi_spigot", 200)
    assert np.array_equal(a, b)
