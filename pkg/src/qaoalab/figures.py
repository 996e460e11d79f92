"""Figure rendering for CLI reports.

Figures are always written to files (Agg backend, no display). Each
function takes the already-computed data so rendering stays a pure side
effect of the report path.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def scaling_figure(ns, es, fit, path) -> None:
    """Log-log sample-deviation plot with the fixed-slope fit line."""
    ns = np.asarray(ns, dtype=float)
    es = np.asarray(es, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(ns, es, "o", label="samples")
    if fit is not None:
        grid = np.geomspace(ns.min(), ns.max(), 64)
        ax.loglog(grid, fit.amplitude * grid ** -0.5, "-",
                  label=f"fit  c n^(-1/2),  c = {fit.amplitude:.3g}")
        ax.loglog(grid, fit.free_amplitude * grid ** fit.free_slope, "--",
                  label=f"free fit  slope = {fit.free_slope:.3f}")
    ax.set_xlabel("n")
    ax.set_ylabel("average sample deviation E")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def dos_figure(values, counts, path) -> None:
    """Bar chart of the exact cost histogram."""
    values = np.asarray(values, dtype=float)
    counts = np.asarray(counts, dtype=float)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.bar(values, counts, width=0.8)
    ax.set_xlabel("cost value")
    ax.set_ylabel("number of strings")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def sweep_figure(depths, improved, totals, path) -> None:
    """Improved-string counts per depth for the sweep table."""
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(depths, improved, "o-", label="improved")
    ax.plot(depths, totals, ":", color="gray", label="total strings")
    ax.set_xlabel("depth p")
    ax.set_ylabel("strings improved")
    ax.set_ylim(bottom=0)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
