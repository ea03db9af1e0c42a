"""Hot inner loops, each in two flavours.

``*_nb`` functions are numba-compiled loops; ``*_np`` functions are
vectorised numpy equivalents. The public names (``scan_prefix``,
``hist_counts`` ...) are bound to one or the other at import time according
to :data:`digitlaw._accel.USE_NUMBA`. Both flavours must return identical
integer results; this is checked in ``tests/test_kernels.py``.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

# -- prefix sums and deviations ---------------------------------------------
#
# d = float(2*S - (q-1)*n) / ((2*sigma) * sqrt(n)) is the canonical evaluation
# order; moments-free scalar code in cltscan.deviation uses the same one so
# that kernel output and scalar output agree bit for bit.


@njit
def _scan_prefix_nb(digits, n0, s0, qm1, sigma):
    m = digits.shape[0]
    sums = np.empty(m, dtype=np.int64)
    dev = np.empty(m, dtype=np.float64)
    s = s0
    two_sigma = 2.0 * sigma
    for i in range(m):
        s += digits[i]
        n = n0 + i + 1
        sums[i] = s
        dev[i] = np.float64(2 * s - qm1 * n) / (two_sigma * np.sqrt(np.float64(n)))
    return sums, dev


def _scan_prefix_np(digits, n0, s0, qm1, sigma):
    sums = np.cumsum(digits, dtype=np.int64)
    sums += s0
    n = np.arange(n0 + 1, n0 + 1 + digits.shape[0], dtype=np.int64)
    num = (2 * sums - qm1 * n).astype(np.float64)
    dev = num / ((2.0 * sigma) * np.sqrt(n.astype(np.float64)))
    return sums, dev


# -- histogram binning --------------------------------------------------------
#
# Output layout: [underflow, bin_0 .. bin_{nb-1}, overflow]; bin b covers
# (edges[b], edges[b+1]].


@njit
def _hist_counts_nb(values, edges):
    nb = edges.shape[0] - 1
    counts = np.zeros(nb + 2, dtype=np.int64)
    lo = edges[0]
    hi = edges[nb]
    inv = nb / (hi - lo)
    for v in values:
        if v <= lo:
            counts[0] += 1
        elif v > hi or v != v:
            counts[nb + 1] += 1
        else:
            i = int(np.ceil((v - lo) * inv))
            if i < 1:
                i = 1
            elif i > nb:
                i = nb
            while v <= edges[i - 1]:
                i -= 1
            while v > edges[i]:
                i += 1
            counts[i] += 1
    return counts


def _hist_counts_np(values, edges):
    idx = np.searchsorted(edges, values, side="left")
    return np.bincount(idx, minlength=edges.shape[0] + 1).astype(np.int64)


# -- envelope buckets ----------------------------------------------------------
#
# Element i of ``delta`` belongs to n = n0 + 1 + i. Bucket id of n is
#   ((n-1) // block) * per_block + ((n-1) % block) * per_block // block
# Returned arrays are per bucket present in the chunk: id, first, last,
# argmin, argmax (local indices; ties resolve to the first occurrence).


@njit
def _envelope_nb(delta, n0, block, per_block):
    m = delta.shape[0]
    ids = np.empty(m, dtype=np.int64)
    first = np.empty(m, dtype=np.int64)
    last = np.empty(m, dtype=np.int64)
    amin = np.empty(m, dtype=np.int64)
    amax = np.empty(m, dtype=np.int64)
    k = -1
    cur = -1
    for i in range(m):
        nm1 = n0 + i
        b = (nm1 // block) * per_block + ((nm1 % block) * per_block) // block
        v = delta[i]
        if b != cur:
            k += 1
            cur = b
            ids[k] = b
            first[k] = i
            amin[k] = i
            amax[k] = i
        else:
            if v < delta[amin[k]]:
                amin[k] = i
            if v > delta[amax[k]]:
                amax[k] = i
        last[k] = i
    k += 1
    return ids[:k], first[:k], last[:k], amin[:k], amax[:k]


def _envelope_np(delta, n0, block, per_block):
    m = delta.shape[0]
    empty = np.empty(0, dtype=np.int64)
    if m == 0:
        return empty, empty, empty, empty, empty
    nm1 = np.arange(n0, n0 + m, dtype=np.int64)
    bid = (nm1 // block) * per_block + ((nm1 % block) * per_block) // block
    first = np.flatnonzero(np.diff(bid)) + 1
    first = np.concatenate(([0], first)).astype(np.int64)
    last = np.concatenate((first[1:] - 1, [m - 1])).astype(np.int64)
    seg = np.repeat(np.arange(first.shape[0]), last - first + 1)

    def first_hit(extreme):
        hits = np.flatnonzero(delta == extreme[seg])
        return hits[np.searchsorted(seg[hits], np.arange(first.shape[0]))]

    amin = first_hit(np.minimum.reduceat(delta, first)).astype(np.int64)
    amax = first_hit(np.maximum.reduceat(delta, first)).astype(np.int64)
    return bid[first], first, last, amin, amax


# -- sliding pattern counts ----------------------------------------------------


@njit
def _pattern_counts_nb(digits, q, k):
    size = q ** k
    counts = np.zeros(size, dtype=np.int64)
    m = digits.shape[0]
    if m < k:
        return counts
    mod = q ** (k - 1)
    code = 0
    for i in range(k - 1):
        code = code * q + digits[i]
    for i in range(k - 1, m):
        code = (code % mod) * q + digits[i]
        counts[code] += 1
    return counts


def _pattern_counts_np(digits, q, k):
    size = q ** k
    m = digits.shape[0] - k + 1
    if m <= 0:
        return np.zeros(size, dtype=np.int64)
    codes = digits[:m].astype(np.int64)
    for j in range(1, k):
        codes *= q
        codes += digits[j:j + m]
    return np.bincount(codes, minlength=size).astype(np.int64)


# -- BBP series ----------------------------------------------------------------
#
# Fractional part of sum_k 16^(n-k)/(8k+j). The left sum uses modular
# exponentiation in int64, valid while (8n+j)^2 < 2^63.

@njit
def _bbp_series_nb(n, j):
    s = 0.0
    for k in range(n + 1):
        r = 8 * k + j
        e = n - k
        result = 1 % r
        base = 16 % r
        while e > 0:
            if e & 1:
                result = (result * base) % r
            base = (base * base) % r
            e >>= 1
        s += result / r
        s -= np.floor(s)
    t = 0.0
    p = 1.0 / 16.0
    k = n + 1
    while True:
        term = p / (8 * k + j)
        if term < 1e-17:
            break
        t += term
        p /= 16.0
        k += 1
    s += t
    return s - np.floor(s)


def _bbp_series_np(n, j):
    k = np.arange(n + 1, dtype=np.int64)
    r = 8 * k + j
    e = n - k
    result = np.ones_like(r) % r
    base = 16 % r
    while e.any():
        odd = (e & 1).astype(bool)
        result[odd] = (result[odd] * base[odd]) % r[odd]
        base = (base * base) % r
        e >>= 1
    terms = result / r
    # sequential fractional reduction, chunked to keep the partial sums small
    s = 0.0
    for block in np.array_split(terms, max(1, terms.shape[0] // 4096)):
        s = (s + float(np.sum(block))) % 1.0
    tail = 0.0
    p = 1.0 / 16.0
    kk = n + 1
    while p / (8 * kk + j) >= 1e-17:
        tail += p / (8 * kk + j)
        p /= 16.0
        kk += 1
    return (s + tail) % 1.0


# -- pi spigot -----------------------------------------------------------------
#
# Base-10000 Rabinowitz-Wagon spigot (Winter's formulation). Emits ``groups``
# 4-digit groups starting with the integer part "3" folded into the first
# group ("3141"); groups may exceed 9999 and must be carry-normalised by the
# caller.


@njit
def _pi_spigot_nb(groups):
    c = 14 * groups
    f = np.full(c + 1, 2000, dtype=np.int64)
    f[c] = 0
    out = np.empty(groups, dtype=np.int64)
    e = 0
    for gi in range(groups):
        d = 0
        g = 2 * c
        b = c
        while True:
            d += f[b] * 10000
            g -= 1
            f[b] = d % g
            d //= g
            g -= 1
            b -= 1
            if b == 0:
                break
            d *= b
        out[gi] = e + d // 10000
        e = d % 10000
        c -= 14
    return out


def _pi_spigot_py(groups):
    # no vectorisable form: every pass carries right-to-left
    c = 14 * groups
    f = [2000] * c + [0]
    out = np.empty(groups, dtype=np.int64)
    e = 0
    for gi in range(groups):
        d = 0
        g = 2 * c
        b = c
        while True:
            d += f[b] * 10000
            g -= 1
            f[b] = d % g
            d //= g
            g -= 1
            b -= 1
            if b == 0:
                break
            d *= b
        out[gi] = e + d // 10000
        e = d % 10000
        c -= 14
    return out


KERNELS = {
    "scan_prefix": (_scan_prefix_nb, _scan_prefix_np),
    "hist_counts": (_hist_counts_nb, _hist_counts_np),
    "envelope": (_envelope_nb, _envelope_np),
    "pattern_counts": (_pattern_counts_nb, _pattern_counts_np),
    "bbp_series": (_bbp_series_nb, _bbp_series_np),
    "pi_spigot": (_pi_spigot_nb, _pi_spigot_py),
}

_pick = 0 if USE_NUMBA else 1
scan_prefix = KERNELS["scan_prefix"][_pick]
hist_counts = KERNELS["hist_counts"][_pick]
envelope = KERNELS["envelope"][_pick]
pattern_counts = KERNELS["pattern_counts"][_pick]
bbp_series = KERNELS["bbp_series"][_pick]
pi_spigot = KERNELS["pi_spigot"][_pick]
