"""SVG charts mirroring the density / cumulative / LIL diagrams."""
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .cltscan import hist_cumulative, hist_density  # noqa: E402


def write_svgs(state, out_dir):
    c = state.config
    paths = []

    rows = hist_density(state.hist)
    x = np.array([r[0] for r in rows])
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(x - c.step / 2, [r[3] for r in rows], width=c.step, color="tab:blue",
           edgecolor="none", label="count / (total * step)")
    grid = np.linspace(-3, 3, 601)
    ax.plot(grid, np.exp(-grid ** 2 / 2) / np.sqrt(2 * np.pi), color="red", label="phi")
    ax.set_xlabel("d")
    ax.set_title(f"density of d, n <= {state.scan.n}")
    ax.legend()
    paths.append(_save(fig, out_dir, "density.svg"))

    rows = hist_cumulative(state.hist)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.step([r[0] for r in rows], [r[1] for r in rows], where="post", label="cumulative")
    ax.plot([r[0] for r in rows], [r[2] for r in rows], color="red", label="Phi")
    ax.set_xlabel("x")
    ax.set_title(f"cumulative histogram of d, n <= {state.scan.n}")
    ax.legend()
    paths.append(_save(fig, out_dir, "cumulative.svg"))

    if state.envelope.buckets:
        pts = state.envelope.rows()
        fig, ax = plt.subplots(figsize=(10, 4))
        ax.plot([p[0] for p in pts], [p[1] for p in pts], linewidth=0.5)
        ax.axhline(0.0, color="black", linewidth=0.5)
        ax.set_xlabel("n")
        ax.set_ylabel("delta")
        ax.set_title("LIL-normalised deviation (bucket envelope)")
        paths.append(_save(fig, out_dir, "lil_series.svg"))

        ext = state.envelope.suffix_extrema()
        fig, ax = plt.subplots(figsize=(10, 4))
        ax.plot(ext.indices, ext.suffix_min, label="suffix min")
        ax.plot(ext.indices, ext.suffix_max, label="suffix max")
        ax.set_xscale("log")
        ax.invert_xaxis()
        ax.set_xlabel("n (decreasing)")
        ax.legend()
        paths.append(_save(fig, out_dir, "suffix_extrema.svg"))
    return paths


def _save(fig, out_dir, name):
    path = os.path.join(out_dir, name)
    # fixed metadata keeps repeated runs byte-identical
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
