"""Borel sliding-window pattern counts, frequencies, z-scores and chi-square."""
import math

import numpy as np

from . import kernels
from .errors import ResourceError, UsageError

#: Largest pattern length accepted without ``allow_large=True``.
MAX_K = 4

_ALPHABET = "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"


class PatternCounter:
    """Overlapping k-gram counts over a digit stream.

    Patterns are indexed by their base-q value. ``window`` holds the last
    k-1 digits seen so that chunks can be fed one after another.
    """

    def __init__(self, q=10, k=1, allow_large=False):
        if k < 1:
            raise UsageError(f"pattern length must be >= 1, got {k}")
        if k > MAX_K and not allow_large:
            raise ResourceError(f"k={k} needs {q}**{k} counters; pass allow_large=True")
        self.q = q
        self.k = k
        self.counts = np.zeros(q ** k, dtype=np.int64)
        self.n = 0
        self.window = np.zeros(0, dtype=np.uint8)

    def carry_in(self, preceding):
        """Prime the window with the k-1 digits that precede the next chunk."""
        if self.k > 1:
            self.window = np.asarray(preceding, dtype=np.uint8)[-(self.k - 1):].copy()
        return self

    def update(self, digits):
        digits = np.asarray(digits, dtype=np.uint8)
        if self.k == 1:
            joined = digits
        else:
            joined = np.concatenate([self.window, digits])
            self.window = joined[max(0, joined.shape[0] - (self.k - 1)):].copy()
        self.counts += kernels.pattern_counts(joined, self.q, self.k)
        self.n += digits.shape[0]
        return self

    def merge(self, other):
        """Add counts of a chunk scanned with the correct k-1 digit carry-in."""
        self.counts += other.counts
        self.n += other.n
        self.window = other.window.copy()
        return self

    @property
    def windows(self):
        return max(self.n - self.k + 1, 0)

    def encode(self, pattern):
        if isinstance(pattern, str):
            try:
                pattern = [_ALPHABET.index(c.upper()) for c in pattern]
            except ValueError:
                raise UsageError(f"bad pattern {pattern!r}") from None
        pattern = list(pattern)
        if len(pattern) != self.k:
            raise UsageError(f"pattern length {len(pattern)} != k={self.k}")
        code = 0
        for d in pattern:
            if not 0 <= d < self.q:
                raise UsageError(f"pattern digit {d} out of range for base {self.q}")
            code = code * self.q + d
        return code

    def decode(self, code):
        out = []
        for _ in range(self.k):
            code, d = divmod(code, self.q)
            out.append(_ALPHABET[d])
        return "".join(reversed(out))

    def count(self, pattern):
        return int(self.counts[self.encode(pattern)])

    def rows(self):
        """CSV rows ``(pattern, count, freq, expected, z)``."""
        self._require()
        p = float(self.q) ** -self.k
        freqs = self.counts / self.n
        z = (freqs - p) / math.sqrt(p * (1.0 - p) / self.n)
        return [(self.decode(c), int(self.counts[c]), float(freqs[c]), p, float(z[c]))
                for c in range(self.counts.shape[0])]

    def _require(self):
        if self.n < self.k:
            raise UsageError(f"need at least k={self.k} digits, have {self.n}")


def pattern_scan(stream, k, n, allow_large=False, chunk=1 << 22):
    """Count every overlapping length-k window among the next ``n`` digits."""
    if n < k:
        raise UsageError(f"digit budget {n} is shorter than k={k}")
    counter = PatternCounter(stream.base, k, allow_large)
    for block in stream.chunks(chunk, limit=stream.cursor + n):
        counter.update(block)
    return counter


def pattern_freq(counter, pattern):
    """count(J) / n; the denominator is n, not the window count n-k+1."""
    counter._require()
    return counter.count(pattern) / counter.n


def z_score(counter, pattern):
    """Binomial z-score of freq(J) against q^-k; window overlap is not corrected."""
    p = float(counter.q) ** -counter.k
    return (pattern_freq(counter, pattern) - p) / math.sqrt(p * (1.0 - p) / counter.n)


def chi_square(counter):
    """Pearson statistic over all q^k patterns, expected (n-k+1) q^-k each."""
    counter._require()
    expected = counter.windows * float(counter.q) ** -counter.k
    if expected < 1.0:
        raise UsageError(f"expected count {expected:.3g} per pattern is below 1")
    stat = float(np.sum((counter.counts - expected) ** 2) / expected)
    return stat, counter.counts.shape[0] - 1
