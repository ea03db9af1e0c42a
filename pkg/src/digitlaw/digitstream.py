"""Digit sources: ASCII digit files, exact generators, BBP hex digits.

Every stream yields *fractional* digits only (index 1 is the first digit
after the radix point) unless ``integer_part=True`` is requested.
"""
import logging
import math
import os
from dataclasses import dataclass
from typing import Optional

import gmpy2
import numpy as np

from . import kernels
from ._accel import USE_NUMBA
from .errors import ParseError, PrecisionError, ResourceError, UsageError

log = logging.getLogger(__name__)

#: Generators refuse requests above this many digits (env-overridable).
MAX_GENERATED_DIGITS = int(os.environ.get("DIGITLAW_MAX_GEN_DIGITS", 200_000_000))

#: Above this count gen_pi_digits switches from the spigot to Chudnovsky.
SPIGOT_LIMIT = 20_000 if USE_NUMBA else 5_000

#: Largest BBP position for which the int64 modular exponentiation is exact.
BBP_MAX_POSITION = 100_000_000

_WS = 254
_BAD = 255
_TABLE = np.full(256, _BAD, dtype=np.uint8)
for _i, _c in enumerate("0123456789abcdefghijklmnopqrstuvwxyz"):
    _TABLE[ord(_c)] = _i
    _TABLE[ord(_c.upper())] = _i
for _c in " \t\r\n":
    _TABLE[ord(_c)] = _WS


@dataclass
class VerificationReport:
    digits_compared: int
    status: str  # "match" | "mismatch" | "short_input"
    first_mismatch: Optional[int] = None

    def __post_init__(self):
        assert (self.status == "mismatch") == (self.first_mismatch is not None)


class DigitStream:
    """Sequential reader of base-q digits.

    Subclasses implement ``_read(count)`` returning at most ``count`` digits
    as a uint8 array (fewer only at end of data) plus ``position()`` /
    ``seek()`` for checkpointing.
    """

    def __init__(self, base, source, length_hint=None):
        if not 2 <= base <= 36:
            raise UsageError(f"base must be in 2..36, got {base}")
        self.base = base
        self.source = source
        self.length_hint = length_hint
        self.cursor = 0

    def read(self, count):
        out = self._read(count)
        self.cursor += out.shape[0]
        return out

    def chunks(self, size=1 << 22, limit=None):
        while limit is None or self.cursor < limit:
            want = size if limit is None else min(size, limit - self.cursor)
            block = self.read(want)
            if block.shape[0] == 0:
                return
            yield block

    def __iter__(self):
        for block in self.chunks(1 << 16):
            yield from block.tolist()

    def reopen(self):
        raise NotImplementedError

    def position(self):
        return {"cursor": self.cursor}

    def seek(self, position):
        raise NotImplementedError


class ArrayDigitStream(DigitStream):
    """Stream over an in-memory digit array (generator output)."""

    def __init__(self, digits, base=10, source=None):
        digits = np.ascontiguousarray(digits, dtype=np.uint8)
        if digits.size and int(digits.max()) >= base:
            raise UsageError(f"digit {int(digits.max())} out of range for base {base}")
        super().__init__(base, source or {"kind": "array"}, length_hint=digits.shape[0])
        self.digits = digits

    def _read(self, count):
        return self.digits[self.cursor:self.cursor + count]

    def reopen(self):
        return ArrayDigitStream(self.digits, self.base, self.source)

    def seek(self, position):
        self.cursor = int(position["cursor"])


class FileDigitStream(DigitStream):
    """Memory-mapped ASCII digit file.

    Bytes 0-9, A-Z and a-z are digits, whitespace is skipped. With
    ``fmt="ascii-with-header"`` a leading ``<integer part>.`` is consumed.
    Other bytes raise :class:`ParseError` in strict mode and are skipped
    with a warning otherwise.
    """

    def __init__(self, path, base=10, fmt="ascii", strict=True, integer_part=False):
        if fmt not in ("ascii", "ascii-with-header"):
            raise UsageError(f"unknown digit file format {fmt!r}")
        self.path = os.fspath(path)
        self.fmt = fmt
        self.strict = strict
        self.include_integer_part = integer_part
        try:
            size = os.path.getsize(self.path)
            self._data = (np.memmap(self.path, dtype=np.uint8, mode="r")
                          if size else np.zeros(0, dtype=np.uint8))
        except OSError as exc:
            raise OSError(f"cannot read digit file {self.path}: {exc}") from exc
        super().__init__(base, {"kind": "file", "path": self.path, "format": fmt},
                         length_hint=None)
        self.integer_part = ""
        self._start = 0
        if fmt == "ascii-with-header":
            self._start = self._parse_header()
        self._prefix = np.zeros(0, dtype=np.uint8)
        if integer_part:
            self._prefix = np.frombuffer(self.integer_part.encode(), dtype=np.uint8) - 48
        self._pos = self._start

    def _parse_header(self):
        head = bytes(self._data[:4096])
        dot = head.find(b".")
        if dot < 0:
            raise ParseError("missing '<integer>.' header", 0)
        text = head[:dot].strip()
        if not text.isdigit():
            raise ParseError(f"malformed header {text[:20]!r}", 0)
        for ch in text.decode():
            if int(ch) >= self.base:
                raise ParseError(f"header digit {ch!r} >= base {self.base}", 0)
        self.integer_part = text.decode()
        return dot + 1

    def _read(self, count):
        parts = []
        if self.cursor < self._prefix.shape[0]:
            parts.append(self._prefix[self.cursor:self.cursor + count])
            count -= parts[0].shape[0]
        total = self._data.shape[0]
        while count > 0 and self._pos < total:
            span = min(total - self._pos, count + count // 8 + 4096)
            raw = np.asarray(self._data[self._pos:self._pos + span])
            vals = _TABLE[raw]
            bad = (vals == _BAD) | ((vals < 36) & (vals >= self.base))
            if bad.any():
                offs = np.flatnonzero(bad)
                at = int(offs[0])
                if self.strict:
                    what = (f"digit {chr(raw[at])!r} >= base {self.base}" if vals[at] < 36
                            else f"invalid byte {int(raw[at])!r}")
                    raise ParseError(what, self._pos + at)
                log.warning("%s: skipped %d invalid byte(s) near offset %d",
                            self.path, offs.shape[0], self._pos + at)
            good = np.flatnonzero(vals < self.base)
            if good.shape[0] > count:
                self._pos += int(good[count])
                good = good[:count]
            else:
                self._pos += span
            parts.append(vals[good])
            count -= good.shape[0]
        if not parts:
            return np.zeros(0, dtype=np.uint8)
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    def reopen(self):
        return FileDigitStream(self.path, self.base, self.fmt, self.strict,
                               self.include_integer_part)

    def position(self):
        return {"cursor": self.cursor, "byte_offset": self._pos}

    def seek(self, position):
        self.cursor = int(position["cursor"])
        self._pos = int(position["byte_offset"])


def open_digit_file(path, base=10, fmt="ascii", strict=True, integer_part=False):
    return FileDigitStream(path, base, fmt, strict, integer_part)


# -- generators ---------------------------------------------------------------


def _check_count(count):
    if count < 1:
        raise UsageError(f"digit count must be >= 1, got {count}")
    if count > MAX_GENERATED_DIGITS:
        raise ResourceError(
            f"{count} digits exceeds the generator budget of {MAX_GENERATED_DIGITS} "
            "(set DIGITLAW_MAX_GEN_DIGITS to raise it)")


def _digits_of(value, width):
    """Decimal digits of a non-negative integer, left-padded to ``width``."""
    text = gmpy2.mpz(value).digits(10).rjust(width, "0")
    return np.frombuffer(text.encode(), dtype=np.uint8) - 48


def _finish(int_part, frac, count, integer_part, source):
    if integer_part:
        frac = np.concatenate([_digits_of(int_part, 1), frac])
    return ArrayDigitStream(frac, 10, source)


def gen_sqrt_digits(radicand, count, integer_part=False):
    """Exact decimal digits of sqrt(radicand) by one integer square root."""
    if radicand < 1:
        raise UsageError(f"radicand must be >= 1, got {radicand}")
    _check_count(count)
    scale = gmpy2.mpz(10) ** count
    root = gmpy2.isqrt(gmpy2.mpz(radicand) * scale * scale)
    int_part, frac = divmod(root, scale)
    return _finish(int_part, _digits_of(frac, count), count, integer_part,
                   {"kind": "gen", "constant": f"sqrt:{radicand}", "count": count})


def _e_split(a, b):
    # sum_{k=a+1}^{b} a!/k! = p/q with q = (a+1)...(b)
    if b - a == 1:
        return gmpy2.mpz(1), gmpy2.mpz(b)
    m = (a + b) // 2
    p1, q1 = _e_split(a, m)
    p2, q2 = _e_split(m, b)
    return p1 * q2 + p2, q1 * q2


def gen_e_digits(count, integer_part=False):
    """Decimal digits of e from the truncated factorial series.

    With N terms the tail sum_{k>N} 1/k! is below 1/(N! N). Both the
    truncated sum and the sum plus that bound are floored at the target
    precision; the digits are accepted only when the two agree.
    """
    _check_count(count)
    scale = gmpy2.mpz(10) ** count
    target = (count + 10) * math.log(10)
    terms = 2
    while math.lgamma(terms + 1) < target:
        terms *= 2
    lo_t, hi_t = terms // 2, terms
    while hi_t - lo_t > 1:
        mid = (lo_t + hi_t) // 2
        lo_t, hi_t = (mid, hi_t) if math.lgamma(mid + 1) < target else (lo_t, mid)
    terms = hi_t
    while True:
        p, q = _e_split(0, terms)
        num = q + p  # (1 + sum_{k=1}^N 1/k!) * N!
        lower = (num * scale) // q
        upper = ((num * terms + 1) * scale) // (q * terms)
        if lower == upper:
            break
        terms += 16
    int_part, frac = divmod(lower, scale)
    return _finish(int_part, _digits_of(frac, count), count, integer_part,
                   {"kind": "gen", "constant": "e", "count": count})


def _pi_spigot(count):
    groups = (count + 1 + 3) // 4 + 2
    out = kernels.pi_spigot(groups).astype(object)
    for i in range(groups - 1, 0, -1):
        if out[i] >= 10000:
            out[i - 1] += out[i] // 10000
            out[i] %= 10000
    g = np.asarray(out, dtype=np.int64)
    digits = np.stack([g // 1000 % 10, g // 100 % 10, g // 10 % 10, g % 10], axis=1)
    digits = digits.ravel().astype(np.uint8)
    assert g[0] // 1000 == 3
    return digits[1:count + 1]


_C3_OVER_24 = 640320 ** 3 // 24


def _chudnovsky_split(a, b):
    if b - a == 1:
        if a == 0:
            p = q = gmpy2.mpz(1)
        else:
            p = gmpy2.mpz((6 * a - 5) * (2 * a - 1) * (6 * a - 1))
            q = gmpy2.mpz(a) * a * a * _C3_OVER_24
        t = p * (13591409 + 545140134 * a)
        if a & 1:
            t = -t
        return p, q, t
    m = (a + b) // 2
    p1, q1, t1 = _chudnovsky_split(a, m)
    p2, q2, t2 = _chudnovsky_split(m, b)
    return p1 * p2, q1 * q2, q2 * t1 + p1 * t2


def _pi_chudnovsky(count):
    guard = 20
    while True:
        prec = count + guard
        one = gmpy2.mpz(10) ** prec
        terms = int(prec / 14.181647462725477) + 2
        p, q, t = _chudnovsky_split(0, terms)
        sqrt_c = gmpy2.isqrt(10005 * one * one)
        approx = (q * 426880 * sqrt_c) // t
        # isqrt floor, the final floor and the series tail each cost < 1 unit
        slack = 10
        div = gmpy2.mpz(10) ** guard
        lo, hi = (approx - slack) // div, (approx + slack) // div
        if lo == hi:
            frac = lo - 3 * gmpy2.mpz(10) ** count
            return _digits_of(frac, count)
        guard += 10


def gen_pi_digits(count, method="auto", integer_part=False):
    """Decimal digits of pi.

    ``method="spigot"`` runs the base-10000 Rabinowitz-Wagon spigot,
    ``"chudnovsky"`` the binary-split Chudnovsky series with guard digits;
    ``"auto"`` uses the spigot up to :data:`SPIGOT_LIMIT` digits.
    """
    _check_count(count)
    if method == "auto":
        method = "spigot" if count <= SPIGOT_LIMIT else "chudnovsky"
    if method == "spigot":
        frac = _pi_spigot(count)
    elif method == "chudnovsky":
        frac = _pi_chudnovsky(count)
    else:
        raise UsageError(f"unknown pi method {method!r}")
    return _finish(3, frac, count, integer_part,
                   {"kind": "gen", "constant": "pi", "count": count})


# -- BBP ---------------------------------------------------------------------


def _bbp_error_bound(n):
    # four series of n+1 reduced terms each, weights 4+2+1+1
    return 8.0 * (n + 32) * 2.0 ** -52


def bbp_hex_digit(position):
    """Hex digit of pi at 1-based fractional ``position`` (pi = 3.243F6A88...).

    Uses the BBP series in double precision. The digit is returned only if
    the eight following hex digits are not all 0 or all F and the fractional
    remainder clears the accumulated rounding bound; otherwise
    :class:`PrecisionError` is raised. Exhaustively validated for positions
    1..10^4 and spot-checked up to 10^6.
    """
    if position < 1:
        raise UsageError(f"position must be >= 1, got {position}")
    if position > BBP_MAX_POSITION:
        raise PrecisionError(f"position {position} beyond validated range "
                             f"1..{BBP_MAX_POSITION}")
    n = position - 1
    x = (4.0 * kernels.bbp_series(n, 1) - 2.0 * kernels.bbp_series(n, 4)
         - kernels.bbp_series(n, 5) - kernels.bbp_series(n, 6))
    x -= math.floor(x)
    y = 16.0 * x
    digit = int(y)
    rem = y - digit
    margin = max(16.0 ** -8, 16.0 * _bbp_error_bound(n))
    if rem < margin or rem > 1.0 - margin:
        raise PrecisionError(f"carry ambiguity at hex position {position}")
    return digit


def bbp_hex_digits(position, count=1):
    return [bbp_hex_digit(position + i) for i in range(count)]


# -- verification ------------------------------------------------------------


def verify_prefix(a, b, count, chunk=1 << 20):
    if a.base != b.base:
        raise UsageError(f"base mismatch: {a.base} vs {b.base}")
    compared = 0
    while compared < count:
        want = min(chunk, count - compared)
        x = a.read(want)
        y = b.read(want)
        m = min(x.shape[0], y.shape[0])
        diff = np.flatnonzero(x[:m] != y[:m])
        if diff.shape[0]:
            at = compared + int(diff[0]) + 1
            return VerificationReport(at, "mismatch", at)
        compared += m
        if m < want:
            return VerificationReport(compared, "short_input")
    return VerificationReport(compared, "match")
