"""Versioned text checkpoints of an analysis run.

The file is JSON; every integer that can outgrow a double (S, counts, n) is
stored as a decimal string and no float is stored at all. Derived floats
are recomputed from the integers on load.
"""
import json
import os

import numpy as np

from .cltscan import ScanState
from .errors import CheckpointError
from .lilscan import Bucket

FORMAT_VERSION = 1
MAGIC = "digitlaw-checkpoint"


def _ints(values):
    return [str(int(v)) for v in values]


def _arr(strings):
    return np.array([int(s) for s in strings], dtype=np.int64)


def state_to_dict(state):
    c = state.config
    return {
        "magic": MAGIC,
        "format_version": FORMAT_VERSION,
        "fingerprint": c.fingerprint(),
        "base": c.base,
        "n": str(state.scan.n),
        "S": str(state.scan.S),
        "histogram": _ints(state.hist.counts),
        "frequency": _ints(state.freq.counts),
        "patterns": {
            str(k): {"n": str(pc.n), "counts": _ints(pc.counts),
                     "window": "".join(str(int(d)) if d < 10 else chr(55 + int(d))
                                       for d in pc.window)}
            for k, pc in state.patterns.items()
        },
        "envelope": [_ints((b.bucket, b.n_first, b.n_min, b.s_min, b.n_max, b.s_max,
                            b.n_last, b.s_last))
                     for b in state.envelope.buckets],
        "tails": _ints(state.tails),
        "block_tails": {str(k): _ints(v) for k, v in sorted(state.block_tails.items())},
        "window": _ints((state.window_total, state.window_hits)),
        "samples": [_ints(s) for s in state.samples],
        "position": {k: str(v) for k, v in state.position.items()},
    }


def checkpoint_save(state, path):
    """Write atomically: a failed write leaves the previous checkpoint intact."""
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(state_to_dict(state), fh, separators=(",", ":"))
        fh.write("\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def checkpoint_load(path, config):
    from .harness import AnalysisState

    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CheckpointError(f"unreadable checkpoint {path}: {exc}") from exc
    if not isinstance(data, dict) or data.get("magic") != MAGIC:
        raise CheckpointError(f"{path} is not a digitlaw checkpoint")
    if data.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"checkpoint format {data.get('format_version')} "
                              f"is not supported (expected {FORMAT_VERSION})")
    if data.get("fingerprint") != config.fingerprint():
        raise CheckpointError("checkpoint was written for a different configuration")
    try:
        state = AnalysisState(config)
        state.scan = ScanState(config.base, int(data["n"]), int(data["S"]))
        state.hist.counts[:] = _arr(data["histogram"])
        state.freq.counts[:] = _arr(data["frequency"])
        for k, entry in data["patterns"].items():
            pc = state.patterns[int(k)]
            pc.n = int(entry["n"])
            pc.counts[:] = _arr(entry["counts"])
            pc.window = np.array([int(ch, 36) for ch in entry["window"]], dtype=np.uint8)
        for row in data["envelope"]:
            b, first, n_min, s_min, n_max, s_max, n_last, s_last = (int(v) for v in row)
            state.envelope.buckets.append(Bucket(
                b, first, n_min, s_min, state.delta_of(n_min, s_min),
                n_max, s_max, state.delta_of(n_max, s_max),
                n_last, s_last, state.delta_of(n_last, s_last)))
        state.tails = [int(v) for v in data["tails"]]
        state.block_tails = {int(k): [int(x) for x in v]
                             for k, v in data["block_tails"].items()}
        state.window_total, state.window_hits = (int(v) for v in data["window"])
        state.samples = [tuple(int(v) for v in s) for s in data["samples"]]
        state.position = {k: int(v) for k, v in data["position"].items()}
    except (KeyError, ValueError, TypeError) as exc:
        raise CheckpointError(f"corrupted checkpoint {path}: {exc!r}") from exc
    if state.freq.n != state.scan.n or state.hist.total > state.scan.n:
        raise CheckpointError(f"corrupted checkpoint {path}: inconsistent counts")
    return state
