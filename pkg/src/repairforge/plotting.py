"""Figures for repair reports (matplotlib, rendered straight to files)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib import pyplot as plt  # noqa: E402

from .report import RepairReport  # noqa: E402


def plot_bandwidth(reports: list[RepairReport], path, title: str = "") -> None:
    """Bar chart of total download per failed node against naive and optimal repair."""
    nodes = [rep.failed for rep in reports]
    download = [rep.total_downloaded for rep in reports]
    first = reports[0]
    naive = first.k * first.alpha
    optimal = float((first.n - 1) * first.optimal_per_node)

    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(nodes) + 2), 3.2))
    ax.bar(nodes, download, color="#4c72b0", width=0.6, label="downloaded")
    ax.axhline(naive, color="#c44e52", linestyle="--", linewidth=1.2, label=f"naive ({naive})")
    ax.axhline(optimal, color="#55a868", linestyle=":", linewidth=1.5, label=f"optimal ({optimal:g})")
    ax.set_xticks(nodes)
    ax.set_xlabel("failed node")
    ax.set_ylabel("symbols downloaded")
    ax.set_ylim(0, max(naive, max(download)) * 1.15)
    ax.legend(frameon=False, fontsize=8, loc="upper right")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def access_matrix(reports: list[RepairReport]) -> np.ndarray:
    """``nodes x alpha`` 0/1 grid: rows read at the first helper for each failed node."""
    alpha = reports[0].alpha
    grid = np.zeros((len(reports), alpha), dtype=np.uint8)
    for i, rep in enumerate(reports):
        rows = rep.rows_accessed()
        if rows is None and rep.helpers:
            rows = set(rep.helpers[0].rows)
        grid[i, sorted(rows or ())] = 1
    return grid


def plot_access(reports: list[RepairReport], path, title: str = "") -> None:
    """Heatmap of which payload rows each repair reads."""
    grid = access_matrix(reports)
    fig, ax = plt.subplots(figsize=(min(12, 2 + 0.25 * grid.shape[1]), 1 + 0.4 * grid.shape[0]))
    ax.imshow(grid, aspect="auto", cmap="Greys", vmin=0, vmax=1, interpolation="nearest")
    ax.set_yticks(range(grid.shape[0]))
    ax.set_yticklabels([str(rep.failed) for rep in reports])
    ax.set_ylabel("failed node")
    step = max(1, grid.shape[1] // 16)
    ticks = list(range(0, grid.shape[1], step))
    ax.set_xticks(ticks)
    ax.set_xticklabels([str(t + 1) for t in ticks])
    ax.set_xlabel("row read at each helper (1-based)")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
