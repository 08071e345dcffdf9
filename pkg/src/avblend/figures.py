"""Matplotlib renderings of the delimited report outputs.

Each report path of the CLI writes these PNGs next to the CSV/JSON files
they visualize; the CSVs stay the canonical machine-readable interface.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_av_histogram(counts: np.ndarray, path: str | Path, title: str = "AV distribution") -> None:
    """Heat map of a per-frame AV histogram (rows: arousal bins, cols: valence bins)."""
    fig, ax = plt.subplots(figsize=(5, 4.2))
    _draw_histogram(ax, counts, title)
    fig.colorbar(ax.images[0], ax=ax, label="frames")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_occupancy_bar(counts, path: str | Path, title: str = "Cluster occupancy") -> None:
    """Bar chart of videos per cluster."""
    counts = np.asarray(counts)
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.bar(np.arange(len(counts)), counts, color="#4878cf")
    ax.set_xlabel("cluster id")
    ax.set_ylabel("videos")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def save_balance_comparison(
    counts_before: np.ndarray, counts_after: np.ndarray, path: str | Path
) -> None:
    """Side-by-side AV histograms before and after augmentation."""
    vmax = max(counts_before.max(), counts_after.max(), 1)
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.0), sharey=True)
    _draw_histogram(axes[0], counts_before, "before", vmax=vmax)
    _draw_histogram(axes[1], counts_after, "after", vmax=vmax)
    fig.colorbar(axes[1].images[0], ax=axes, label="frames", fraction=0.04)
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _draw_histogram(ax, counts: np.ndarray, title: str, vmax=None) -> None:
    # counts[a_bin, v_bin]: show valence on x, arousal on y, origin lower-left
    ax.imshow(
        counts,
        origin="lower",
        extent=(-1, 1, -1, 1),
        aspect="equal",
        cmap="viridis",
        vmin=0,
        vmax=vmax,
    )
    ax.set_xlabel("valence")
    ax.set_ylabel("arousal")
    ax.set_title(title)
