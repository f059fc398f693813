"""Matplotlib figures written next to the CSV/JSON reports.

Figures are rendered with the Agg backend and saved without timestamps or
software metadata so identical inputs give byte-identical PNG files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import DistributionRow  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 100,
    "figure.dpi": 100,
}
PNG_METADATA = {"Software": None}


def _save(fig, path: Path) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    fig.savefig(tmp, format="png", metadata=PNG_METADATA)
    plt.close(fig)
    tmp.replace(path)


def plot_distribution(rows: Sequence[DistributionRow], path: Path) -> None:
    """Two-panel bar chart: segment count and total duration per class."""
    labels = [r.label for r in rows]
    y = np.arange(len(rows))
    with plt.rc_context(STYLE):
        fig, (ax_n, ax_d) = plt.subplots(1, 2, figsize=(8, 3.2), sharey=True)
        ax_n.barh(y, [r.count for r in rows], color="#4c72b0")
        ax_n.set_yticks(y, labels)
        ax_n.invert_yaxis()
        ax_n.set_xlabel("segments")
        ax_d.barh(y, [r.duration_s for r in rows], color="#dd8452")
        ax_d.set_xlabel("duration (s)")
        for ax, vals, fmt in ((ax_n, [r.count for r in rows], "{:d}"),
                              (ax_d, [r.duration_s for r in rows], "{:.2f}")):
            for yi, v in zip(y, vals):
                ax.text(v, yi, " " + fmt.format(v), va="center", fontsize=7)
        fig.tight_layout()
        _save(fig, path)


def plot_per_class_f1(classes: Sequence[str], f1: Sequence[float], path: Path,
                      average: float | None = None, weighted: float | None = None) -> None:
    x = np.arange(len(classes))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7, 3.4))
        ax.bar(x, f1, color="#55a868")
        ax.set_xticks(x, classes, rotation=35, ha="right")
        ax.set_ylim(0, 1)
        ax.set_ylabel("F1")
        if average is not None:
            ax.axhline(average, color="k", lw=0.8, ls="--", label=f"average {average:.4f}")
        if weighted is not None:
            ax.axhline(weighted, color="#c44e52", lw=0.8, ls=":", label=f"weighted {weighted:.4f}")
        if average is not None or weighted is not None:
            ax.legend(frameon=False, fontsize=7)
        fig.tight_layout()
        _save(fig, path)


def plot_confusion(rows: Sequence[str], cols: Sequence[str], matrix, path: Path) -> None:
    """Heatmap of ground-truth (rows) against predicted (columns) counts."""
    m = np.asarray(matrix, dtype=float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 5))
        ax.imshow(m, cmap="Blues", aspect="auto")
        ax.set_xticks(np.arange(len(cols)), cols, rotation=45, ha="right")
        ax.set_yticks(np.arange(len(rows)), rows)
        ax.set_xlabel("predicted")
        ax.set_ylabel("ground truth")
        hi = m.max() if m.size else 0
        for i in range(m.shape[0]):
            for j in range(m.shape[1]):
                ax.text(j, i, f"{int(m[i, j])}", ha="center", va="center", fontsize=7,
                        color="white" if hi and m[i, j] > hi / 2 else "black")
        fig.tight_layout()
        _save(fig, path)
