"""Figure rendering for the report path of the CLI.

Everything goes through Agg straight to files; no interactive backends.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def save_series_plot(path, series, xlabel, ylabel, title,
                     logx=False, logy=False):
    """One line per entry in `series`, which maps label -> (x, y)."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, (x, y) in series.items():
        ax.plot(x, y, marker="o", markersize=3, linewidth=1.2, label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_mass_plot(path, columns, title):
    """Stem-style comparison of discrete mass functions.

    columns maps label -> (sizes, masses); zero masses are dropped so log
    scales stay usable.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, (j, m) in columns.items():
        keep = m > 0
        ax.plot(j[keep], m[keep], marker="o", markersize=3,
                linewidth=0.8, alpha=0.8, label=label)
    ax.set_yscale("log")
    ax.set_xlabel("size j")
    ax.set_ylabel("mass")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
