"""Figure rendering for run artifacts.

Reads the delimited outputs of a run directory and writes one PNG per
curve next to the CSV it came from.  Purely presentational: every number
shown here lives in the CSVs.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = ["render_run_figures"]

# csv name -> (x column, y columns, y-axis label, log-log)
_FIGURES = {
    "hamiltonian.csv": ("x", ["w", "gap", "residual_corrected"],
                        "conserved quantity and residual", False),
    "energy.csv": ("R", ["E"], "truncated energy E_R", True),
    "monotonicity.csv": ("R", ["I"], "scaled energy I(R)", False),
    "radial_hamiltonian.csv": ("r", ["curve", "printed"],
                               "radial monotone quantity", False),
    "growth.csv": ("R", ["value"], "scaled growth curve", False),
}


def _read_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    names = lines[0].strip().split(",")
    data = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]])
    return {n: data[:, i] for i, n in enumerate(names)}


def render_run_figures(run_dir: str) -> list:
    """Render PNGs for every known CSV in the directory; returns the paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    for csv_name, (xcol, ycols, ylabel, loglog) in _FIGURES.items():
        path = os.path.join(run_dir, csv_name)
        if not os.path.exists(path):
            continue
        cols = _read_csv(path)
        if xcol not in cols:
            continue
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for yc in ycols:
            if yc in cols:
                ax.plot(cols[xcol], cols[yc], label=yc)
        if loglog:
            ax.set_xscale("log")
            ax.set_yscale("log")
        ax.set_xlabel(xcol)
        ax.set_ylabel(ylabel)
        ax.legend(loc="best", fontsize=8)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        out = path[:-4] + ".png"
        fig.savefig(out, dpi=120)
        plt.close(fig)
        written.append(out)
    return written
