"""Exact prefix sums, normalised deviations d_n and their histograms."""
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import UsageError
from .moments import MomentSet, digit_moments, normal_cdf, normal_pdf

# chunk-local prefix sums are int64; keep S + chunk headroom well inside it
_INT64_SAFE = 2 ** 62


@dataclass(frozen=True)
class ScanState:
    """Digit count ``n`` and exact digit sum ``S`` (Python ints, unbounded)."""

    q: int = 10
    n: int = 0
    S: int = 0

    def advance(self, digits):
        """Fold a whole chunk; returns the new state."""
        total = int(np.sum(digits, dtype=np.int64))
        return ScanState(self.q, self.n + int(digits.shape[0]), self.S + total)


def scan_update(state, digit):
    if not 0 <= digit < state.q:
        raise UsageError(f"digit {digit} out of range for base {state.q}")
    return ScanState(state.q, state.n + 1, state.S + int(digit))


def deviation(state, m=None):
    """(S - mu n) / (sigma sqrt n), evaluated from the exact integers."""
    if state.n < 1:
        raise UsageError("deviation needs n >= 1")
    if m is None:
        m = digit_moments(state.q)
    # 2S - (q-1)n is exact; same evaluation order as kernels.scan_prefix
    num = float(2 * state.S - (state.q - 1) * state.n)
    return num / ((2.0 * m.sigma) * math.sqrt(state.n))


def scan_chunk(state, digits, m=None):
    """Prefix sums and deviations for every n covered by ``digits``.

    Returns ``(sums, d)`` as int64 / float64 arrays; ``sums[i]`` is S at
    n = state.n + 1 + i.
    """
    if m is None:
        m = digit_moments(state.q)
    if state.S + (state.q - 1) * digits.shape[0] >= _INT64_SAFE:
        raise OverflowError("digit sum leaves the int64 kernel range")
    return kernels.scan_prefix(digits, state.n, state.S, state.q - 1, m.sigma)


# -- histograms ---------------------------------------------------------------


class HistogramAccumulator:
    """Integer counts of d over right-closed bins (x - step, x] on [x_min, x_max].

    Values <= x_min are tallied in ``underflow`` and values > x_max in
    ``overflow`` so that nothing is dropped.
    """

    def __init__(self, step=0.1, x_min=-3.0, x_max=3.0):
        nbins = round((x_max - x_min) / step)
        if nbins < 1 or not math.isclose(nbins * step, x_max - x_min, rel_tol=1e-12):
            raise UsageError(f"range [{x_min}, {x_max}] is not a multiple of step {step}")
        self.step = step
        self.x_min = x_min
        self.x_max = x_max
        # (x_min*nb + b*(x_max-x_min)) / nb keeps 0.1-multiples correctly rounded
        b = np.arange(nbins + 1, dtype=np.float64)
        self.edges = (x_min * nbins + b * (x_max - x_min)) / nbins
        self.counts = np.zeros(nbins + 2, dtype=np.int64)

    @property
    def nbins(self):
        return self.counts.shape[0] - 2

    @property
    def bins(self):
        return self.counts[1:-1]

    @property
    def underflow(self):
        return int(self.counts[0])

    @property
    def overflow(self):
        return int(self.counts[-1])

    @property
    def total(self):
        return int(self.counts.sum())

    def add(self, d):
        if math.isnan(d):
            raise UsageError("cannot histogram NaN")
        self.counts[int(np.searchsorted(self.edges, d, side="left"))] += 1
        return self

    def add_many(self, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape[0]:
            self.counts += kernels.hist_counts(values, self.edges)
        return self

    def merge(self, other):
        if not np.array_equal(self.edges, other.edges):
            raise UsageError("cannot merge histograms with different bins")
        self.counts += other.counts
        return self

    def density_rows(self):
        return hist_density(self)

    def cumulative_rows(self):
        return hist_cumulative(self)


def hist_accumulate(acc, d):
    return acc.add(d)


def hist_density(acc):
    """Rows ``(x_right, count, frac, density, phi_ref)`` per bin.

    ``frac`` is count/total; ``density`` is count/(total*step) and is the
    column comparable with the normal density at the bin midpoint.
    """
    total = acc.total
    if total < 1:
        raise UsageError("histogram is empty")
    rows = []
    for b in range(acc.nbins):
        left, right = float(acc.edges[b]), float(acc.edges[b + 1])
        count = int(acc.bins[b])
        rows.append((right, count, count / total, count / (total * acc.step),
                     normal_pdf(0.5 * (left + right))))
    return rows


def hist_cumulative(acc):
    """Rows ``(x, cum_frac, Phi_ref)`` with cum_frac = #{d <= x} / total."""
    total = acc.total
    if total < 1:
        raise UsageError("histogram is empty")
    running = np.cumsum(acc.counts[:-1])
    rows = [(float(acc.edges[0]), int(running[0]) / total, normal_cdf(float(acc.edges[0])))]
    for b in range(acc.nbins):
        x = float(acc.edges[b + 1])
        rows.append((x, int(running[b + 1]) / total, normal_cdf(x)))
    return rows


# -- digit frequencies ----------------------------------------------------------


class FrequencyTable:
    def __init__(self, q=10):
        self.q = q
        self.counts = np.zeros(q, dtype=np.int64)

    @property
    def n(self):
        return int(self.counts.sum())

    def update(self, digit):
        if not 0 <= digit < self.q:
            raise UsageError(f"digit {digit} out of range for base {self.q}")
        self.counts[digit] += 1
        return self

    def update_many(self, digits):
        self.counts += np.bincount(digits, minlength=self.q)[:self.q]
        return self

    def merge(self, other):
        self.counts += other.counts
        return self

    def variance(self):
        return freq_variance(self)

    def rows(self):
        n = self.n
        return [(j, int(c), int(c) / n if n else 0.0) for j, c in enumerate(self.counts)]


def freq_update(table, digit):
    return table.update(digit)


def freq_variance(table):
    """Population variance (1/q) sum_j (count_j/n - 1/q)^2 of digit frequencies."""
    n = table.n
    if n == 0:
        raise UsageError("frequency table is empty")
    p = 1.0 / table.q
    freqs = table.counts / n
    return float(np.sum((freqs - p) ** 2) / table.q)


__all__ = [
    "MomentSet", "ScanState", "scan_update", "deviation", "scan_chunk",
    "HistogramAccumulator", "hist_accumulate", "hist_density", "hist_cumulative",
    "FrequencyTable", "freq_update", "freq_variance",
]
