import filecmp
import json
import os

import numpy as np
import pytest

from digitlaw.checkpoint import FORMAT_VERSION, checkpoint_load
from digitlaw.cltscan import ScanState, deviation
from digitlaw.errors import CheckpointError, UsageError
from digitlaw.harness import (AnalysisState, BaselineDigitStream, RunConfig, baseline_digits,
                              run_analysis)

BUNDLE = ["density.csv", "cumulative.csv", "frequency.csv", "lil_series.csv",
          "suffix_extrema.csv", "blocks.csv", "normality_k1.csv", "normality_k2.csv",
          "frequency_summary.csv", "normality_summary.csv", "summary.json", "summary.txt"]


def _cfg(tmp_path, name, **kw):
    base = dict(source="gen:baseline", max_digits=10 ** 5, block_size=10 ** 4,
                points_per_block=50, chunk_size=1 << 14, out_dir=str(tmp_path / name))
    base.update(kw)
    return RunConfig(**base)


def _same_bundle(a, b, names=BUNDLE):
    match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    assert mismatch == [] and errors == [], (mismatch, errors)


# -- baseline ---------------------------------------------------------------------


def test_baseline_frozen_values():
    digits = baseline_digits(1, 10 ** 6).read(10 ** 6)
    assert int(digits.sum()) == 4496528
    assert digits.max() == 9 and digits.min() == 0


def test_baseline_deterministic_and_seed_dependent():
    a = baseline_digits(7, 5000).read(5000)
    assert np.array_equal(a, baseline_digits(7, 5000).read(5000))
    assert not np.array_equal(a, baseline_digits(8, 5000).read(5000))


@pytest.mark.parametrize("q", [2, 3, 10, 16, 36])
def test_baseline_digits_in_range(q):
    d = BaselineDigitStream(3, q).read(20000)
    assert d.max() == q - 1 and d.min() == 0


def test_baseline_seek_across_blocks():
    s = BaselineDigitStream(5)
    s.read(600_001)   # beyond the first raw block
    pos = s.position()
    tail = s.read(1000)
    t = BaselineDigitStream(5)
    t.seek(pos)
    assert np.array_equal(t.read(1000), tail)
    assert np.array_equal(BaselineDigitStream(5).read(601_001)[-1000:], tail)


# -- config -------------------------------------------------------------------------


def test_config_validation(tmp_path):
    with pytest.raises(UsageError):
        _cfg(tmp_path, "x", step=0.05)
    with pytest.raises(UsageError):
        _cfg(tmp_path, "x", base=1)
    with pytest.raises(UsageError):
        _cfg(tmp_path, "x", lil_cutoff=5)
    assert _cfg(tmp_path, "x", step=0.05, allow_any_step=True).step == 0.05


def test_fingerprint_ignores_runtime_fields(tmp_path):
    a = _cfg(tmp_path, "a")
    b = _cfg(tmp_path, "b", max_digits=10 ** 7, threads=4, svg=True)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != _cfg(tmp_path, "a", seed=2).fingerprint()
    assert a.fingerprint() != _cfg(tmp_path, "a", step=0.025).fingerprint()


def test_unknown_source(tmp_path):
    with pytest.raises(UsageError):
        run_analysis(_cfg(tmp_path, "x", source="gen:tau"))
    with pytest.raises(UsageError):
        run_analysis(_cfg(tmp_path, "x", source="gen:e", base=16))


# -- analysis runs ------------------------------------------------------------------


def test_run_matches_direct_computation(tmp_path):
    cfg = _cfg(tmp_path, "run", max_digits=54321, k_list=(1, 2, 3))
    state = run_analysis(cfg)
    digits = baseline_digits(1, 54321).read(54321)
    assert state.scan.n == 54321 and state.scan.S == int(digits.sum())
    assert state.freq.counts.tolist() == np.bincount(digits, minlength=10).tolist()
    assert state.hist.total == 54321
    assert int(state.patterns[3].counts.sum()) == 54321 - 2
    out = tmp_path / "run"
    for name in BUNDLE + ["normality_k3.csv"]:
        assert (out / name).exists(), name
    summary = json.loads((out / "summary.json").read_text())
    assert summary["d"] == deviation(ScanState(10, 54321, int(digits.sum())))
    header = (out / "density.csv").read_text().splitlines()[0]
    assert header == "x_right,count,frac,density,phi_ref"


def test_burn_in_excludes_early_points(tmp_path):
    state = run_analysis(_cfg(tmp_path, "b", max_digits=5000, burn_in=1000))
    assert state.hist.total == 4000
    assert state.freq.n == 5000


def test_threads_and_chunking_do_not_change_results(tmp_path):
    run_analysis(_cfg(tmp_path, "one", chunk_size=1 << 16))
    run_analysis(_cfg(tmp_path, "four", threads=4, chunk_size=3000))
    _same_bundle(tmp_path / "one", tmp_path / "four")


def test_output_is_deterministic(tmp_path):
    run_analysis(_cfg(tmp_path, "r1"))
    run_analysis(_cfg(tmp_path, "r2"))
    _same_bundle(tmp_path / "r1", tmp_path / "r2")


def test_window_and_samples(tmp_path):
    cfg = _cfg(tmp_path, "w", max_digits=20000, window=(100, 20000),
               interval=(-1.0, 1.0), sample_every=1000)
    state = run_analysis(cfg)
    assert state.window_total == 19901
    assert [n for n, _ in state.samples] == list(range(1000, 20001, 1000))
    digits = baseline_digits(1, 20000).read(20000)
    assert state.samples[4] == (5000, int(digits[:5000].sum()))
    summary = json.loads((tmp_path / "w" / "summary.json").read_text())
    assert 0.0 <= summary["window"]["fraction_in"] <= 1.0
    assert (tmp_path / "w" / "lil_points.csv").exists()


# -- checkpoint / resume ------------------------------------------------------------


@pytest.mark.parametrize("source", ["gen:baseline", "file"])
def test_resume_equals_straight_run(tmp_path, source):
    n = 10 ** 6
    if source == "file":
        digits = baseline_digits(9, n).read(n)
        path = tmp_path / "digits.txt"
        path.write_bytes(b"3." + (digits + 48).tobytes() + b"\n")
        source = str(path)
    kw = dict(source=source, block_size=10 ** 5, chunk_size=1 << 16, k_list=(1, 2, 3))
    straight = run_analysis(_cfg(tmp_path, "straight", max_digits=n, **kw))
    ck = str(tmp_path / "run.ckpt")
    for i in range(1, 5):
        state = run_analysis(_cfg(tmp_path, "pieces", max_digits=i * n // 4,
                                  checkpoint_path=ck, **kw), resume=i > 1)
        assert state.scan.n == i * n // 4
    assert (state.scan.n, state.scan.S) == (straight.scan.n, straight.scan.S)
    assert np.array_equal(state.hist.counts, straight.hist.counts)
    assert np.array_equal(state.patterns[3].counts, straight.patterns[3].counts)
    _same_bundle(tmp_path / "straight", tmp_path / "pieces")


def test_interval_checkpoints_are_loadable(tmp_path):
    ck = str(tmp_path / "c.ckpt")
    cfg = _cfg(tmp_path, "c", checkpoint_path=ck, checkpoint_interval=30000)
    seen = []
    run_analysis(cfg, progress=lambda n: seen.append(checkpoint_load(ck, cfg).scan.n)
                 if os.path.exists(ck) else None)
    assert seen[-1] >= 30000
    data = json.loads(open(ck).read())
    assert data["n"] == "100000" and data["format_version"] == FORMAT_VERSION
    assert all(isinstance(v, str) for v in data["histogram"])


def test_checkpoint_rejections(tmp_path):
    ck = tmp_path / "c.ckpt"
    cfg = _cfg(tmp_path, "c", max_digits=20000, checkpoint_path=str(ck))
    run_analysis(cfg)
    good = json.loads(ck.read_text())

    with pytest.raises(CheckpointError):
        checkpoint_load(str(ck), _cfg(tmp_path, "c", seed=2))

    def broken(mutate):
        data = json.loads(json.dumps(good))
        mutate(data)
        ck.write_text(json.dumps(data))
        with pytest.raises(CheckpointError):
            checkpoint_load(str(ck), cfg)

    broken(lambda d: d.update(format_version=FORMAT_VERSION + 1))
    broken(lambda d: d.update(magic="other"))
    broken(lambda d: d.pop("S"))
    broken(lambda d: d.update(n="12x"))
    broken(lambda d: d["frequency"].__setitem__(0, "999999"))
    ck.write_text('{"magic": "digitlaw-checkpo')
    with pytest.raises(CheckpointError):
        checkpoint_load(str(ck), cfg)


def test_resume_requires_checkpoint(tmp_path):
    with pytest.raises(UsageError):
        run_analysis(_cfg(tmp_path, "x", checkpoint_path=str(tmp_path / "none")), resume=True)


def test_restored_state_recomputes_floats(tmp_path):
    ck = str(tmp_path / "c.ckpt")
    cfg = _cfg(tmp_path, "c", max_digits=30000, checkpoint_path=ck)
    live = run_analysis(cfg)
    loaded = checkpoint_load(ck, cfg)
    assert [vars(b) for b in loaded.envelope.buckets] == [vars(b) for b in live.envelope.buckets]
    assert isinstance(loaded, AnalysisState)


def test_checkpoint_rejects_other_base(tmp_path):
    ck = str(tmp_path / "c.ckpt")
    run_analysis(_cfg(tmp_path, "c", max_digits=5000, checkpoint_path=ck))
    with pytest.raises(CheckpointError):
        checkpoint_load(ck, _cfg(tmp_path, "c", base=16, checkpoint_path=ck))


# -- seeded baseline regression values (seed 1, recorded on first run) -------------


def test_baseline_statistics_at_one_million(tmp_path):
    state = run_analysis(_cfg(tmp_path, "b", max_digits=10 ** 6, block_size=10 ** 5))
    summary = json.loads((tmp_path / "b" / "summary.json").read_text())
    fr = summary["frequency"]
    ratio = fr["observed_variance"] / fr["expected_variance"]
    assert 0.2 <= ratio <= 5
    assert ratio == pytest.approx(0.9257, abs=1e-4)
    assert summary["normality"]["1"]["chi_square"] == pytest.approx(8.33168, abs=1e-6)
    assert summary["normality"]["1"]["chi_square"] < 27.88
    max_z = max(abs(r[4]) for r in state.patterns[2].rows())
    assert max_z == pytest.approx(2.6231486978265344, rel=1e-12)
    assert max_z < 5


def test_baseline_delta_stays_in_lil_band(tmp_path):
    # qualitative LIL check on the random model: delta stays well inside (-1.5, 1.5)
    state = run_analysis(_cfg(tmp_path, "l", max_digits=10 ** 7, block_size=10 ** 6,
                              points_per_block=100, chunk_size=1 << 22))
    ext = state.envelope.suffix_extrema()
    lo, hi = float(ext.suffix_min[0]), float(ext.suffix_max[0])
    assert (lo, hi) == (-1.4482278681848932, 0.48022980653621217)
    assert -1.5 < lo < 0 < hi < 1.5
