"""LIL normalisation, suffix extrema and envelope-preserving downsampling."""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, UsageError

#: Smallest n for which the LIL divisor is used (ln ln n > 0 needs n > e).
LIL_CUTOFF = 10


@dataclass(frozen=True)
class LilPoint:
    n: int
    d: float
    delta: float


@dataclass
class SuffixExtrema:
    indices: np.ndarray
    suffix_min: np.ndarray
    suffix_max: np.ndarray

    def rows(self):
        return list(zip(self.indices.tolist(), self.suffix_min.tolist(),
                        self.suffix_max.tolist()))


def lil_divisor(n):
    """sqrt(2 ln ln n), natural logarithms."""
    if n < LIL_CUTOFF:
        raise DomainError(f"LIL divisor needs n >= {LIL_CUTOFF}, got {n}")
    return math.sqrt(2.0 * math.log(math.log(n)))


def lil_delta(d, n):
    return d / lil_divisor(n)


def lil_delta_array(d, n):
    """Vectorised lil_delta; ``n`` must be >= LIL_CUTOFF everywhere."""
    n = np.asarray(n, dtype=np.float64)
    return np.asarray(d) / np.sqrt(2.0 * np.log(np.log(n)))


def suffix_extrema(series, indices=None):
    """Running min/max over every tail series[i:], in one reverse pass."""
    values = np.asarray(series, dtype=np.float64)
    if values.shape[0] == 0:
        raise UsageError("suffix extrema of an empty series")
    if indices is None:
        indices = np.arange(1, values.shape[0] + 1)
    smin = np.minimum.accumulate(values[::-1])[::-1]
    smax = np.maximum.accumulate(values[::-1])[::-1]
    return SuffixExtrema(np.asarray(indices), smin, smax)


def tail_fraction(d_values, threshold):
    values = np.asarray(d_values, dtype=np.float64)
    if values.shape[0] == 0:
        raise UsageError("tail fraction of an empty series")
    return float(np.count_nonzero(values > threshold)) / values.shape[0]


def oscillation_summary(n, delta, n_from, n_to, interval=None):
    """Min and max of delta over n_from <= n <= n_to.

    If ``interval=(lo, hi)`` is given, also returns the fraction of those
    points with lo <= delta <= hi.
    """
    if not n_from < n_to:
        raise UsageError(f"need n_from < n_to, got {n_from}, {n_to}")
    n = np.asarray(n)
    delta = np.asarray(delta, dtype=np.float64)
    sel = delta[(n >= n_from) & (n <= n_to)]
    if sel.shape[0] == 0:
        raise UsageError(f"no points in [{n_from}, {n_to}]")
    lo_v, hi_v = float(sel.min()), float(sel.max())
    if interval is None:
        return lo_v, hi_v, None
    lo, hi = interval
    return lo_v, hi_v, float(np.count_nonzero((sel >= lo) & (sel <= hi))) / sel.shape[0]


# -- envelope downsampling --------------------------------------------------------


@dataclass
class Bucket:
    """Envelope of one downsampling bucket; n and exact S at the extremes."""

    bucket: int
    n_first: int
    n_min: int
    s_min: int
    v_min: float
    n_max: int
    s_max: int
    v_max: float
    n_last: int
    s_last: int
    v_last: float

    def absorb(self, other):
        if other.v_min < self.v_min:
            self.n_min, self.s_min, self.v_min = other.n_min, other.s_min, other.v_min
        if other.v_max > self.v_max:
            self.n_max, self.s_max, self.v_max = other.n_max, other.s_max, other.v_max
        self.n_last, self.s_last, self.v_last = other.n_last, other.s_last, other.v_last


class EnvelopeBuilder:
    """Streaming block/bucket envelope of a delta series.

    n runs over consecutive blocks of ``block_size``; every block is split
    into ``points_per_block`` buckets and each bucket keeps its minimum,
    maximum and last point. The exact digit sum S is stored next to each
    kept n; when ``value_of(n, S)`` is given the stored floats are recomputed
    from those integers, so a restored envelope is bit-identical to a live one.
    """

    def __init__(self, block_size=10 ** 8, points_per_block=1000, value_of=None):
        if not block_size >= points_per_block >= 1:
            raise UsageError("need block_size >= points_per_block >= 1")
        self.block_size = block_size
        self.points_per_block = points_per_block
        self.value_of = value_of
        self.buckets = []

    def bucket_of(self, n):
        b, off = divmod(n - 1, self.block_size)
        return b * self.points_per_block + off * self.points_per_block // self.block_size

    def add(self, n0, delta, sums):
        """Absorb points n = n0+1 .. n0+len(delta) with digit sums ``sums``."""
        if delta.shape[0] == 0:
            return
        ids, first, last, amin, amax = kernels.envelope(
            delta, n0, self.block_size, self.points_per_block)
        for k in range(ids.shape[0]):
            pts = []
            for i in (int(amin[k]), int(amax[k]), int(last[k])):
                n, s = n0 + 1 + i, int(sums[i])
                v = float(delta[i]) if self.value_of is None else self.value_of(n, s)
                pts.extend((n, s, v))
            self.add_bucket(Bucket(int(ids[k]), n0 + 1 + int(first[k]), *pts))

    def add_bucket(self, bk):
        if self.buckets and self.buckets[-1].bucket == bk.bucket:
            self.buckets[-1].absorb(bk)
        else:
            self.buckets.append(bk)

    def merge(self, other):
        for bk in other.buckets:
            self.add_bucket(Bucket(**vars(bk)))
        return self

    def rows(self):
        """Plot rows ``(n, delta)``: per bucket its min, max and end point in n order."""
        out = []
        for bk in self.buckets:
            pts = sorted({(bk.n_min, bk.v_min), (bk.n_max, bk.v_max), (bk.n_last, bk.v_last)})
            out.extend(pts)
        return out

    def block_rows(self):
        """Per block ``(block, n_from, n_to, min_delta, max_delta)``."""
        blocks = {}
        for bk in self.buckets:
            blk = bk.bucket // self.points_per_block
            cur = blocks.get(blk)
            if cur is None:
                blocks[blk] = [blk, bk.n_first, bk.n_last, bk.v_min, bk.v_max]
            else:
                cur[2] = bk.n_last
                cur[3] = min(cur[3], bk.v_min)
                cur[4] = max(cur[4], bk.v_max)
        return [tuple(v) for _, v in sorted(blocks.items())]

    def suffix_extrema(self):
        """Exact suffix extrema at every bucket start n.

        The tail [n_first, N] of the raw series is the union of whole
        buckets, so min/max over bucket envelopes equals the raw answer.
        """
        if not self.buckets:
            raise UsageError("envelope is empty")
        idx = np.array([bk.n_first for bk in self.buckets], dtype=np.int64)
        smin = np.minimum.accumulate(np.array([bk.v_min for bk in self.buckets])[::-1])[::-1]
        smax = np.maximum.accumulate(np.array([bk.v_max for bk in self.buckets])[::-1])[::-1]
        return SuffixExtrema(idx, smin, smax)


def block_series(points, block_size, points_per_block):
    """Envelope-preserving downsampling of ``(n, delta)`` points.

    ``points`` is an iterable of :class:`LilPoint` (or ``(n, delta)`` pairs)
    with consecutive n. Returns the ``(n, delta)`` plot rows.
    """
    pts = [(p.n, p.delta) if isinstance(p, LilPoint) else (int(p[0]), float(p[1]))
           for p in points]
    env = EnvelopeBuilder(block_size, points_per_block)
    if pts:
        n = np.array([p[0] for p in pts], dtype=np.int64)
        if np.any(np.diff(n) != 1):
            raise UsageError("block_series needs consecutive n")
        delta = np.array([p[1] for p in pts], dtype=np.float64)
        env.add(int(n[0]) - 1, delta, np.zeros(delta.shape[0], dtype=np.int64))
    return env.rows()
