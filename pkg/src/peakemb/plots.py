"""Matplotlib figure rendering for projections and reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ExperimentReport
from .tsne import Projection2D

_MARKERS = ["o", "s", "^", "D", "v", "P", "X", "*", "<", ">"]


def save_projection_figure(projection: Projection2D, path, title: str = "") -> None:
    """Scatter the 2-D coordinates with one marker style per label."""
    coords = projection.coordinates
    labels = np.asarray(projection.labels)
    fig, ax = plt.subplots(figsize=(6, 5))
    for i, lab in enumerate(np.unique(labels)):
        mask = labels == lab
        ax.scatter(
            coords[mask, 0],
            coords[mask, 1],
            marker=_MARKERS[i % len(_MARKERS)],
            s=36,
            alpha=0.8,
            label=str(lab),
        )
    ax.set_xlabel("dim 1")
    ax.set_ylabel("dim 2")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def save_report_figures(report: ExperimentReport, out_dir) -> list[Path]:
    """Render summary figures for a report; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    names = sorted(report.averages)
    sc_vals = [report.averages[n].sc for n in names]
    gsi_vals = [report.averages[n].gsi for n in names]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(x - 0.2, sc_vals, width=0.4, label="SC")
    ax.bar(x + 0.2, gsi_vals, width=0.4, label="GSI")
    ax.set_xticks(x)
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("average metric")
    ax.set_title(f"Average separability per feature set ({report.mode})")
    ax.legend()
    fig.tight_layout()
    path = out_dir / "averages.png"
    fig.savefig(path)
    plt.close(fig)
    written.append(path)

    # one SC-vs-GSI point per evaluated pair/partition
    fig, ax = plt.subplots(figsize=(6, 5))
    any_points = False
    for i, name in enumerate(names):
        keyed = report.per_pair.get(name) or report.per_partition.get(name) or {}
        if not keyed:
            continue
        any_points = True
        vals = list(keyed.values())
        ax.scatter(
            [m.sc for m in vals],
            [m.gsi for m in vals],
            marker=_MARKERS[i % len(_MARKERS)],
            alpha=0.7,
            label=name,
        )
    if any_points:
        ax.set_xlabel("SC")
        ax.set_ylabel("GSI")
        ax.set_title("Per-comparison separability")
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / "per_comparison.png"
        fig.savefig(path)
        written.append(path)
    plt.close(fig)
    return written
