"""CSV and summary emission for a finished (or checkpointed) analysis."""
import csv
import json
import math
import os

from .cltscan import deviation, freq_variance, hist_cumulative, hist_density
from .lilscan import lil_divisor
from .moments import berry_esseen_bound, expected_freq_variance
from .normality import chi_square

DENSITY_HEADER = ("x_right", "count", "frac", "density", "phi_ref")
CUMULATIVE_HEADER = ("x", "cum_frac", "Phi_ref")
FREQUENCY_HEADER = ("digit", "count", "freq")
LIL_HEADER = ("n", "delta")
EXTREMA_HEADER = ("n", "suffix_min", "suffix_max")
BLOCKS_HEADER = ("n_from", "n_to", "min_delta", "max_delta")
PATTERN_HEADER = ("pattern", "count", "freq", "expected", "z")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow([repr(v) if isinstance(v, float) else v for v in row])


def summarize(state):
    c = state.config
    n, s = state.scan.n, state.scan.S
    d = deviation(state.scan, state.moments)
    summary = {
        "source": c.source,
        "base": c.base,
        "n": n,
        "S": str(s),
        "d": d,
        "delta": d / lil_divisor(n) if n >= c.lil_cutoff else None,
        "lil_divisor": lil_divisor(n) if n >= c.lil_cutoff else None,
        "berry_esseen_bound": berry_esseen_bound(c.base, n),
        "histogram": {"step": c.step, "burn_in": c.burn_in, "total": state.hist.total,
                      "underflow": state.hist.underflow, "overflow": state.hist.overflow},
        "frequency": {"observed_variance": freq_variance(state.freq),
                      "expected_variance": expected_freq_variance(n, c.base)},
        "tail_fractions": {repr(t): cnt / n
                           for t, cnt in zip(c.tail_thresholds, state.tails)},
        "blocks": [],
        "normality": {},
    }
    for blk, n_from, n_to, lo, hi in state.envelope.block_rows():
        tails = state.block_tails.get(blk, [0] * len(c.tail_thresholds))
        first_n = blk * c.block_size + 1
        size = n_to - first_n + 1
        summary["blocks"].append({
            "block": blk, "n_from": n_from, "n_to": n_to,
            "min_delta": lo, "max_delta": hi,
            "tail_fractions": {repr(t): cnt / size
                               for t, cnt in zip(c.tail_thresholds, tails)},
        })
    if state.envelope.buckets:
        ext = state.envelope.suffix_extrema()
        summary["delta_range"] = [float(ext.suffix_min[0]), float(ext.suffix_max[0])]
    for k, pc in state.patterns.items():
        entry = {"windows": pc.windows}
        if pc.windows * float(c.base) ** -k >= 1.0:
            stat, dof = chi_square(pc)
            entry.update(chi_square=stat, dof=dof)
        summary["normality"][str(k)] = entry
    if c.window is not None:
        summary["window"] = {"n_from": c.window[0], "n_to": c.window[1],
                             "points": state.window_total}
        if c.interval is not None and state.window_total:
            summary["window"].update(interval=list(c.interval),
                                     fraction_in=state.window_hits / state.window_total)
    return summary


def _summary_text(summary):
    lines = [
        f"source            {summary['source']}",
        f"digits (n)        {summary['n']}",
        f"digit sum (S)     {summary['S']}",
        f"d                 {summary['d']:.12g}",
    ]
    if summary["delta"] is not None:
        lines.append(f"delta             {summary['delta']:.12g}")
    lines.append(f"Berry-Esseen      {summary['berry_esseen_bound']:.6g}")
    fr = summary["frequency"]
    lines.append(f"freq variance     {fr['observed_variance']:.6g} "
                 f"(expected {fr['expected_variance']:.6g})")
    for t, f in summary["tail_fractions"].items():
        lines.append(f"fraction d > {t:<5} {f:.6f}")
    for k, entry in summary["normality"].items():
        if "chi_square" in entry:
            lines.append(f"chi-square k={k}    {entry['chi_square']:.4f} (dof {entry['dof']})")
    if summary["blocks"]:
        lines.append("")
        lines.append(f"{'n_from':>12} {'n_to':>12} {'min delta':>11} {'max delta':>11}")
        for b in summary["blocks"]:
            lines.append(f"{b['n_from']:>12} {b['n_to']:>12} "
                         f"{b['min_delta']:>11.5f} {b['max_delta']:>11.5f}")
    if "window" in summary and "fraction_in" in summary["window"]:
        w = summary["window"]
        lines.append(f"fraction of d in {w['interval']} over "
                     f"[{w['n_from']}, {w['n_to']}]: {w['fraction_in']:.4f}")
    return "\n".join(lines) + "\n"


def write_bundle(state, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    p = lambda name: os.path.join(out_dir, name)  # noqa: E731
    _write_csv(p("density.csv"), DENSITY_HEADER, hist_density(state.hist)
               if state.hist.total else [])
    _write_csv(p("cumulative.csv"), CUMULATIVE_HEADER, hist_cumulative(state.hist)
               if state.hist.total else [])
    _write_csv(p("frequency.csv"), FREQUENCY_HEADER, state.freq.rows())
    _write_csv(p("lil_series.csv"), LIL_HEADER, state.envelope.rows())
    if state.envelope.buckets:
        _write_csv(p("suffix_extrema.csv"), EXTREMA_HEADER,
                   state.envelope.suffix_extrema().rows())
    _write_csv(p("blocks.csv"), BLOCKS_HEADER,
               [row[1:] for row in state.envelope.block_rows()])
    summary = summarize(state)
    fr = summary["frequency"]
    _write_csv(p("frequency_summary.csv"), ("n", "observed_variance", "expected_variance"),
               [(state.scan.n, fr["observed_variance"], fr["expected_variance"])])
    chi_rows = []
    for k, pc in state.patterns.items():
        if pc.n >= k:
            _write_csv(p(f"normality_k{k}.csv"), PATTERN_HEADER, pc.rows())
        entry = summary["normality"][str(k)]
        if "chi_square" in entry:
            chi_rows.append((k, entry["chi_square"], entry["dof"]))
    _write_csv(p("normality_summary.csv"), ("k", "statistic", "dof"), chi_rows)
    if state.samples:
        rows = []
        for n, s in state.samples:
            d = deviation(type(state.scan)(state.config.base, n, s), state.moments)
            rows.append((n, d, d / lil_divisor(n) if n >= state.config.lil_cutoff else ""))
        _write_csv(p("lil_points.csv"), ("n", "d", "delta"), rows)
    with open(p("summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, default=_json_default)
        fh.write("\n")
    with open(p("summary.txt"), "w") as fh:
        fh.write(_summary_text(summary))
    if state.config.svg:
        from . import plots
        plots.write_svgs(state, out_dir)
    return summary


def _json_default(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    raise TypeError(f"not JSON serialisable: {value!r}")
