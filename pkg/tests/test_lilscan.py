import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from digitlaw.errors import DomainError, UsageError
from digitlaw.lilscan import (EnvelopeBuilder, LilPoint, block_series, lil_delta,
                              lil_delta_array, lil_divisor, oscillation_summary,
                              suffix_extrema, tail_fraction)


@pytest.mark.parametrize("n, expected", [(10 ** 8, 2.41), (10 ** 9, 2.46), (10 ** 10, 2.50)])
def test_divisor_examples(n, expected):
    assert lil_divisor(n) == pytest.approx(expected, abs=0.005)


def test_divisor_domain():
    assert lil_divisor(10) == math.sqrt(2 * math.log(math.log(10)))
    for n in (0, 1, 2, 9):
        with pytest.raises(DomainError):
            lil_divisor(n)


def test_delta_scaling_example():
    # delta = -0.60 at n = 1e9 corresponds to d of about -1.48
    assert -0.60 * lil_divisor(10 ** 9) == pytest.approx(-1.48, abs=0.005)
    assert lil_delta(-1.477, 10 ** 9) == pytest.approx(-0.60, abs=0.001)


@given(st.integers(10, 10 ** 15), st.floats(-10, 10))
def test_delta_array_matches_scalar(n, d):
    assert lil_delta_array([d], [n])[0] == pytest.approx(lil_delta(d, n), rel=1e-14, abs=1e-300)


# -- suffix extrema ----------------------------------------------------------------


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=200))
def test_suffix_extrema_brute_force(values):
    ext = suffix_extrema(values)
    for i in range(len(values)):
        assert ext.suffix_min[i] == min(values[i:])
        assert ext.suffix_max[i] == max(values[i:])
    assert ext.indices[0] == 1
    assert all(a <= b for a, b in zip(ext.suffix_min, ext.suffix_min[1:]))
    assert all(a >= b for a, b in zip(ext.suffix_max, ext.suffix_max[1:]))


def test_suffix_extrema_example():
    ext = suffix_extrema([0.3, -0.5, 0.9, 0.1])
    assert ext.rows() == [(1, -0.5, 0.9), (2, -0.5, 0.9), (3, 0.1, 0.9), (4, 0.1, 0.1)]
    with pytest.raises(UsageError):
        suffix_extrema([])


# -- tails and oscillation ---------------------------------------------------------


def test_tail_fraction_example():
    assert tail_fraction([0.5, 0.7, 1.2, -2.0], 0.6) == 0.5
    assert tail_fraction([0.5, 0.7, 1.2, -2.0], 1.0) == 0.25
    # strict inequality
    assert tail_fraction([1.0], 1.0) == 0.0


def test_oscillation_example():
    n = np.arange(1, 11)
    delta = np.array([0.0, 0.5, -0.2, 0.9, -0.7, 0.1, 0.2, 0.3, -0.1, 0.4])
    lo, hi, frac = oscillation_summary(n, delta, 3, 8, interval=(-0.5, 0.5))
    assert (lo, hi) == (-0.7, 0.9)
    assert frac == pytest.approx(4 / 6)
    assert oscillation_summary(n, delta, 1, 10)[2] is None
    with pytest.raises(UsageError):
        oscillation_summary(n, delta, 5, 5)
    with pytest.raises(UsageError):
        oscillation_summary(n, delta, 20, 30)


# -- envelope downsampling --------------------------------------------------------


def _brute_envelope(n0, values, block, per_block):
    buckets = {}
    for i, v in enumerate(values):
        n = n0 + 1 + i
        b = ((n - 1) // block) * per_block + ((n - 1) % block) * per_block // block
        buckets.setdefault(b, []).append((n, v))
    out = {}
    for b, pts in buckets.items():
        vals = [v for _, v in pts]
        out[b] = (pts[0][0], min(vals), max(vals), pts[-1])
    return out


envelope_case = st.tuples(
    st.integers(0, 500),
    st.lists(st.floats(-3, 3), min_size=1, max_size=300),
    st.integers(1, 60),
    st.integers(1, 60),
).filter(lambda t: t[2] >= t[3])


@settings(max_examples=80)
@given(envelope_case)
def test_envelope_keeps_extremes_of_every_bucket(case):
    n0, values, block, per_block = case
    env = EnvelopeBuilder(block, per_block)
    arr = np.array(values)
    env.add(n0, arr, np.zeros(len(values), dtype=np.int64))
    brute = _brute_envelope(n0, values, block, per_block)
    assert [bk.bucket for bk in env.buckets] == sorted(brute)
    for bk in env.buckets:
        first, lo, hi, last = brute[bk.bucket]
        assert (bk.n_first, bk.v_min, bk.v_max) == (first, lo, hi)
        assert (bk.n_last, bk.v_last) == last
        assert arr[bk.n_min - n0 - 1] == lo and arr[bk.n_max - n0 - 1] == hi
    # plotted rows always include the global extremes
    vs = [v for _, v in env.rows()]
    assert min(vs) == min(values) and max(vs) == max(values)
    # suffix extrema over buckets equal the raw suffix extrema at bucket starts
    ext = env.suffix_extrema()
    for idx, lo, hi in ext.rows():
        assert lo == min(values[idx - n0 - 1:]) and hi == max(values[idx - n0 - 1:])


@settings(max_examples=60)
@given(envelope_case, st.lists(st.integers(0, 300), max_size=5))
def test_envelope_chunked_equals_whole(case, cuts):
    n0, values, block, per_block = case
    arr = np.array(values)
    sums = np.arange(len(values), dtype=np.int64)
    whole = EnvelopeBuilder(block, per_block)
    whole.add(n0, arr, sums)
    cuts = sorted({0, len(values), *[min(c, len(values)) for c in cuts]})
    merged = EnvelopeBuilder(block, per_block)
    for a, b in zip(cuts, cuts[1:]):
        part = EnvelopeBuilder(block, per_block)
        part.add(n0 + a, arr[a:b], sums[a:b])
        merged.merge(part)
    assert [vars(b) for b in merged.buckets] == [vars(b) for b in whole.buckets]


def test_block_series_lossless_when_dense():
    pts = [LilPoint(n, 0.0, math.sin(n)) for n in range(10, 60)]
    rows = block_series(pts, block_size=10, points_per_block=10)
    assert rows == [(p.n, p.delta) for p in pts]


def test_block_series_example():
    values = [0.1, -0.4, 0.3, 0.2, 0.8, -0.1, 0.0, 0.05]
    rows = block_series(list(zip(range(1, 9), values)), block_size=4, points_per_block=1)
    # block 1: min at n=2, max at n=3, last n=4; block 2: max n=5, min n=6, last n=8
    assert rows == [(2, -0.4), (3, 0.3), (4, 0.2), (5, 0.8), (6, -0.1), (8, 0.05)]


def test_block_rows_and_validation():
    env = EnvelopeBuilder(4, 2)
    env.add(0, np.array([0.1, -0.4, 0.3, 0.2, 0.8, -0.1]), np.zeros(6, dtype=np.int64))
    assert env.block_rows() == [(0, 1, 4, -0.4, 0.3), (1, 5, 6, -0.1, 0.8)]
    with pytest.raises(UsageError):
        EnvelopeBuilder(2, 5)
    with pytest.raises(UsageError):
        EnvelopeBuilder(4, 2).suffix_extrema()
    with pytest.raises(UsageError):
        block_series([(1, 0.0), (3, 0.0)], 4, 2)


def test_value_of_recomputes_from_integers():
    env = EnvelopeBuilder(10, 2, value_of=lambda n, s: float(s) / n)
    env.add(0, np.zeros(4), np.array([5, 6, 7, 8], dtype=np.int64))
    # the delta array only picks positions; stored values come from value_of
    assert env.buckets[0].v_last == 8 / 4
