"""Plot-script emission and optional in-process rendering.

``run`` always writes :data:`PLOT_SCRIPT_NAME`, a standalone script that reads
the CSV artifacts next to it. ``render_figures`` executes the same script
text (so both paths draw identical figures) and needs matplotlib installed.
"""

from pathlib import Path
from typing import List

from .channel import GridSpec
from .errors import ZakScatterError

PLOT_SCRIPT_NAME = "plot_results.py"
FIGURE_NAMES = ("scattering.png", "mse.png")

_TEMPLATE = '''\
"""Figures for one run: truth vs estimate grids and the MSE curve.

Usage: python {script} [directory]   (defaults to the script's directory)
Reads truth.csv, estimate.csv and mse.csv; writes scattering.png and mse.png.
"""
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

N_DELAY = {n_delay}
N_DOPPLER = {n_doppler}


def read_grid(path):
    out = np.zeros((N_DELAY, N_DOPPLER))
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[int(row["k"]), int(row["m"])] = float(row["value"])
    return out


def read_curve(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return (np.array([float(r["J"]) for r in rows]),
            np.array([float(r["rel_mse"]) for r in rows]))


def main(directory):
    truth = read_grid(os.path.join(directory, "truth.csv"))
    est = read_grid(os.path.join(directory, "estimate.csv"))
    vmax = max(truth.max(), est.max(), 1e-300)
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.6), sharey=True, layout="constrained")
    for ax, data, title in zip(axes, (truth, est), ("truth", "estimate")):
        im = ax.imshow(data.T, origin="lower", aspect="auto", vmin=min(0.0, est.min()), vmax=vmax)
        ax.set_title(title)
        ax.set_xlabel("delay tap k")
    axes[0].set_ylabel("Doppler bin m")
    fig.colorbar(im, ax=axes, shrink=0.85)
    fig.savefig(os.path.join(directory, "scattering.png"), dpi=120)
    plt.close(fig)

    J, err = read_curve(os.path.join(directory, "mse.csv"))
    fig, ax = plt.subplots(figsize=(4.5, 3.6))
    ax.loglog(J, err, "o-", label="rel. error")
    if J.size:
        ax.loglog(J, err[0] * np.sqrt(J[0] / J), "k--", lw=0.8, label="J^(-1/2)")
    ax.set_xlabel("soundings J")
    ax.set_ylabel("||C_hat - C|| / ||C||")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(directory, "mse.png"), dpi=120)
    plt.close(fig)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.dirname(os.path.abspath(__file__)))
'''


def plot_script(grid: GridSpec) -> str:
    return _TEMPLATE.format(script=PLOT_SCRIPT_NAME, n_delay=grid.n_delay, n_doppler=grid.n_doppler)


def render_figures(directory, grid: GridSpec) -> List[Path]:
    """Draw the run figures into ``directory`` (requires matplotlib)."""
    import importlib.util
    if importlib.util.find_spec("matplotlib") is None:
        raise ZakScatterError("rendering needs matplotlib; install the 'plot' extra")
    namespace = {"__name__": "zakscatter_plot"}
    exec(compile(plot_script(grid), PLOT_SCRIPT_NAME, "exec"), namespace)
    namespace["main"](str(directory))
    return [Path(directory) / name for name in FIGURE_NAMES]
