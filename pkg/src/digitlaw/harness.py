"""Full-stream analysis runs: configuration, baseline digits, chunk pipeline."""
import dataclasses
import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import checkpoint as ckpt
from . import report
from .cltscan import FrequencyTable, HistogramAccumulator, ScanState, deviation, scan_chunk
from .digitstream import (DigitStream, gen_e_digits, gen_pi_digits, gen_sqrt_digits,
                          open_digit_file)
from .errors import UsageError
from .lilscan import EnvelopeBuilder, lil_delta, lil_delta_array
from .moments import digit_moments
from .normality import PatternCounter

log = logging.getLogger(__name__)

DEFAULT_OUT_ENV = "DIGITLAW_OUT"


@dataclass
class RunConfig:
    source: str
    base: int = 10
    max_digits: int = 10 ** 6
    step: float = 0.1
    burn_in: int = 0
    block_size: int = 10 ** 8
    points_per_block: int = 1000
    lil_cutoff: int = 10
    k_list: tuple = (1, 2)
    out_dir: str = "digitlaw-out"
    checkpoint_path: Optional[str] = None
    checkpoint_interval: int = 0
    seed: int = 1
    threads: int = 1
    chunk_size: int = 1 << 22
    file_format: str = "auto"
    strict: bool = True
    tail_thresholds: tuple = (0.6, 1.0)
    interval: Optional[tuple] = None
    window: Optional[tuple] = None
    sample_every: int = 0
    allow_any_step: bool = False
    svg: bool = False

    # fields that do not change results and may differ between resumed runs
    _RUNTIME = ("max_digits", "out_dir", "checkpoint_path", "checkpoint_interval",
                "threads", "svg")

    def __post_init__(self):
        if self.max_digits < 1:
            raise UsageError("max_digits must be >= 1")
        if self.step not in (0.1, 0.025) and not self.allow_any_step:
            raise UsageError(f"step must be 0.1 or 0.025, got {self.step}")
        if not 2 <= self.base <= 36:
            raise UsageError(f"base must be in 2..36, got {self.base}")
        if self.lil_cutoff < 10:
            raise UsageError("lil_cutoff must be >= 10")
        if self.chunk_size < 1 or self.threads < 1:
            raise UsageError("chunk_size and threads must be >= 1")
        self.k_list = tuple(sorted(set(int(k) for k in self.k_list)))
        self.tail_thresholds = tuple(float(t) for t in self.tail_thresholds)

    def fingerprint(self):
        data = {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                if f.name not in self._RUNTIME}
        if not data["source"].startswith("gen:"):
            data["source"] = os.path.abspath(data["source"])
        text = json.dumps(data, sort_keys=True, default=list)
        return hashlib.sha256(text.encode()).hexdigest()


# -- seeded baseline ------------------------------------------------------------


class BaselineDigitStream(DigitStream):
    """Uniform pseudo-random base-q digits from PCG64.

    Raw 64-bit outputs are generated in blocks of ``WORDS`` words and split
    into little-endian bytes; a byte b is accepted iff b < 256 - 256 % q and
    then yields the digit b % q, which is exactly uniform. Position is
    (block index, digits consumed from that block), so a stream can be
    resumed with ``PCG64.advance``.
    """

    WORDS = 1 << 16

    def __init__(self, seed, q=10):
        super().__init__(q, {"kind": "baseline", "seed": seed, "algorithm": "pcg64-bytes"})
        self.seed = seed
        self._limit = 256 - 256 % q
        self._bitgen = np.random.PCG64(seed)
        self._block = 0
        self._used = 0
        self._buf = self._next_block()

    def _next_block(self):
        raw = self._bitgen.random_raw(self.WORDS).astype("<u8").view(np.uint8)
        return (raw[raw < self._limit] % self.base).astype(np.uint8)

    def _read(self, count):
        parts = []
        while count > 0:
            if self._used == self._buf.shape[0]:
                self._buf = self._next_block()
                self._block += 1
                self._used = 0
            take = self._buf[self._used:self._used + count]
            self._used += take.shape[0]
            count -= take.shape[0]
            parts.append(take)
        if not parts:
            return np.zeros(0, dtype=np.uint8)
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    def reopen(self):
        return BaselineDigitStream(self.seed, self.base)

    def position(self):
        return {"cursor": self.cursor, "block": self._block, "used": self._used}

    def seek(self, position):
        self._bitgen = np.random.PCG64(self.seed)
        self._bitgen.advance(int(position["block"]) * self.WORDS)
        self._block = int(position["block"])
        self._buf = self._next_block()
        self._used = int(position["used"])
        self.cursor = int(position["cursor"])


class _Limited(DigitStream):
    """Caps a stream at ``count`` digits (baseline streams are unbounded)."""

    def __init__(self, inner, count):
        super().__init__(inner.base, inner.source, length_hint=count)
        self.inner = inner

    def _read(self, count):
        return self.inner.read(min(count, self.length_hint - self.cursor))

    def position(self):
        return self.inner.position()

    def seek(self, position):
        self.inner.seek(position)
        self.cursor = self.inner.cursor


def baseline_digits(seed, count, q=10):
    return _Limited(BaselineDigitStream(seed, q), count)


# -- sources ----------------------------------------------------------------------


def open_source(config):
    """Resolve ``--source`` into a digit stream of at most max_digits digits."""
    src = config.source
    count = config.max_digits
    if src.startswith("gen:"):
        kind = src[4:]
        if kind == "baseline":
            return baseline_digits(config.seed, count, config.base)
        if config.base != 10:
            raise UsageError(f"generator {src} produces base-10 digits only")
        if kind == "e":
            return gen_e_digits(count)
        if kind == "pi":
            return gen_pi_digits(count)
        if kind == "sqrt2":
            return gen_sqrt_digits(2, count)
        if kind.startswith("sqrt:") and kind[5:].isdigit():
            return gen_sqrt_digits(int(kind[5:]), count)
        raise UsageError(f"unknown generator {src!r}")
    fmt = config.file_format
    if fmt == "auto":
        with open(src, "rb") as fh:
            head = fh.read(64)
        fmt = "ascii-with-header" if b"." in head else "ascii"
    return open_digit_file(src, config.base, fmt, strict=config.strict)


# -- analysis state ---------------------------------------------------------------


@dataclass
class AnalysisState:
    """Everything accumulated over a prefix of the stream (all integer)."""

    config: RunConfig
    scan: ScanState = None
    hist: HistogramAccumulator = None
    freq: FrequencyTable = None
    patterns: dict = None
    envelope: EnvelopeBuilder = None
    tails: list = None
    block_tails: dict = field(default_factory=dict)
    window_total: int = 0
    window_hits: int = 0
    samples: list = field(default_factory=list)
    position: dict = field(default_factory=dict)

    def __post_init__(self):
        c = self.config
        self.moments = digit_moments(c.base)
        if self.scan is None:
            self.scan = ScanState(c.base)
        if self.hist is None:
            self.hist = HistogramAccumulator(c.step)
        if self.freq is None:
            self.freq = FrequencyTable(c.base)
        if self.patterns is None:
            self.patterns = {k: PatternCounter(c.base, k) for k in c.k_list}
        if self.envelope is None:
            self.envelope = EnvelopeBuilder(c.block_size, c.points_per_block,
                                            value_of=self.delta_of)
        if self.tails is None:
            self.tails = [0] * len(c.tail_thresholds)

    def delta_of(self, n, s):
        return lil_delta(deviation(ScanState(self.config.base, n, s), self.moments), n)

    def merge(self, part):
        """Fold in a chunk result computed from this state's end point."""
        assert part.start == self.scan.n
        self.scan = part.scan
        self.hist.merge(part.hist)
        self.freq.merge(part.freq)
        for k, pc in part.patterns.items():
            self.patterns[k].merge(pc)
        self.envelope.merge(part.envelope)
        self.tails = [a + b for a, b in zip(self.tails, part.tails)]
        for blk, counts in part.block_tails.items():
            cur = self.block_tails.setdefault(blk, [0] * len(counts))
            self.block_tails[blk] = [a + b for a, b in zip(cur, counts)]
        self.window_total += part.window_total
        self.window_hits += part.window_hits
        self.samples.extend(part.samples)


@dataclass
class ChunkResult:
    start: int
    scan: ScanState
    hist: HistogramAccumulator
    freq: FrequencyTable
    patterns: dict
    envelope: EnvelopeBuilder
    tails: list
    block_tails: dict
    window_total: int
    window_hits: int
    samples: list


def scan_one_chunk(config, moments, state, digits, carry, value_of):
    """Analyse one chunk entering at ``state`` with ``carry`` = preceding digits.

    Pure function of its inputs; chunks can run on separate threads.
    """
    m = digits.shape[0]
    n0 = state.n
    sums, d = scan_chunk(state, digits, moments)

    hist = HistogramAccumulator(config.step)
    hist.add_many(d[max(0, config.burn_in - n0):])
    freq = FrequencyTable(config.base).update_many(digits)
    patterns = {k: PatternCounter(config.base, k).carry_in(carry).update(digits)
                for k in config.k_list}

    envelope = EnvelopeBuilder(config.block_size, config.points_per_block, value_of)
    lo = max(0, config.lil_cutoff - n0 - 1)
    if lo < m:
        n_arr = np.arange(n0 + 1 + lo, n0 + 1 + m, dtype=np.int64)
        envelope.add(n0 + lo, lil_delta_array(d[lo:], n_arr), sums[lo:])

    tails = []
    block_tails = {}
    bs = config.block_size
    masks = [d > t for t in config.tail_thresholds]
    for mask in masks:
        tails.append(int(np.count_nonzero(mask)))
    for blk in range(n0 // bs, (n0 + m - 1) // bs + 1):
        a, b = max(0, blk * bs - n0), min(m, (blk + 1) * bs - n0)
        block_tails[blk] = [int(np.count_nonzero(mask[a:b])) for mask in masks]

    window_total = window_hits = 0
    if config.window is not None:
        w_from, w_to = config.window
        a, b = max(0, w_from - n0 - 1), min(m, w_to - n0)
        if a < b:
            window_total = b - a
            if config.interval is not None:
                lo_d, hi_d = config.interval
                seg = d[a:b]
                window_hits = int(np.count_nonzero((seg >= lo_d) & (seg <= hi_d)))

    samples = []
    if config.sample_every:
        first = (-(n0 + 1)) % config.sample_every
        for i in range(first, m, config.sample_every):
            samples.append((n0 + 1 + i, int(sums[i])))

    end = ScanState(state.q, n0 + m, int(sums[-1]) if m else state.S)
    return ChunkResult(n0, end, hist, freq, patterns, envelope, tails, block_tails,
                       window_total, window_hits, samples)


def _batches(stream, config):
    """Groups of up to ``threads`` chunks, aligned to multiples of chunk_size."""
    limit = config.max_digits
    batch = []
    while stream.cursor < limit:
        size = config.chunk_size - stream.cursor % config.chunk_size
        block = stream.read(min(size, limit - stream.cursor))
        if block.shape[0] == 0:
            break
        batch.append(block)
        if len(batch) == config.threads:
            yield batch
            batch = []
    if batch:
        yield batch


def run_analysis(config, resume=False, progress=None):
    """One streaming pass over the source; writes the report bundle.

    Returns the final :class:`AnalysisState`.
    """
    stream = open_source(config)
    state = AnalysisState(config)
    if resume:
        if not config.checkpoint_path or not os.path.exists(config.checkpoint_path):
            raise UsageError("--resume needs an existing --checkpoint file")
        state = ckpt.checkpoint_load(config.checkpoint_path, config)
        stream.seek(state.position)
        log.info("resumed at n=%d", state.scan.n)
    carry = _carry_from(state)
    next_ckpt = _next_checkpoint(config, state.scan.n)
    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        for batch in _batches(stream, config):
            # sequential prefix pass: entering (n, S) and carry of every chunk
            entries = []
            cur = state.scan
            for block in batch:
                entries.append((cur, carry))
                cur = cur.advance(block)
                carry = np.concatenate([carry, block])[-_carry_len(config):] \
                    if _carry_len(config) else carry
            jobs = [(config, state.moments, st, block, cy, state.delta_of)
                    for (st, cy), block in zip(entries, batch)]
            if pool is None:
                parts = [scan_one_chunk(*job) for job in jobs]
            else:
                parts = list(pool.map(lambda job: scan_one_chunk(*job), jobs))
            for part in parts:
                state.merge(part)
            assert state.scan == cur
            state.position = stream.position()
            if progress:
                progress(state.scan.n)
            if next_ckpt is not None and state.scan.n >= next_ckpt:
                ckpt.checkpoint_save(state, config.checkpoint_path)
                next_ckpt = _next_checkpoint(config, state.scan.n)
    finally:
        if pool is not None:
            pool.shutdown()
    if state.scan.n < config.max_digits:
        log.warning("source ended after %d of %d digits", state.scan.n, config.max_digits)
    state.position = stream.position()
    if config.checkpoint_path:
        ckpt.checkpoint_save(state, config.checkpoint_path)
    if state.scan.n >= 1:
        report.write_bundle(state, config.out_dir)
    return state


def _carry_len(config):
    return max(config.k_list, default=1) - 1


def _carry_from(state):
    windows = [pc.window for pc in state.patterns.values()]
    return max(windows, key=len, default=np.zeros(0, dtype=np.uint8)).copy()


def _next_checkpoint(config, n):
    if not config.checkpoint_path or config.checkpoint_interval <= 0:
        return None
    step = config.checkpoint_interval
    return (n // step + 1) * step
