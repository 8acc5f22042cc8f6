"""Matplotlib renderings of the CLI's CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import HaldaneDistance  # noqa: E402

# Fixed metadata keeps repeated renders byte-identical.
_PNG_METADATA = {"Software": None}


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def plot_histogram(hist, path, L=1.0):
    """Simulated rate histogram with the analytic distance-prior density on top."""
    prior = HaldaneDistance(L)
    lo, hi = prior.support()
    grid = np.linspace(lo, hi, 400)
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.bar(
        hist.bin_edges[:-1],
        hist.densities,
        width=np.diff(hist.bin_edges),
        align="edge",
        color="0.8",
        edgecolor="0.5",
        linewidth=0.4,
        label=f"simulated (n={hist.n_samples})",
    )
    ax.plot(grid, prior.density(grid), color="k", linewidth=1.5, label="analytic")
    ax.set_xlabel(r"recombination rate $\rho$")
    ax.set_ylabel("density")
    ax.set_xlim(0.0, 0.5)
    ax.legend(frameon=False)
    _finish(fig, path)


def plot_curve(x, y, path, xlabel=r"recombination rate $\rho$", ylabel="density", label=None):
    """Line plot of a density evaluated on a grid."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    y = np.asarray(y, dtype=float)
    finite = np.isfinite(y)
    ax.plot(np.asarray(x)[finite], y[finite], color="k", linewidth=1.5, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if label:
        ax.legend(frameon=False)
    _finish(fig, path)
