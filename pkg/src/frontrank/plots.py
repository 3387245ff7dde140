"""Figure rendering for the CLI report paths; files only, no interactive UI."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .asymptotics import ContinuumTable, LevelCurveReport
from .metrics import MetricReport

__all__ = [
    "save_ndcg_figure",
    "save_profile_figure",
    "save_continuum_figure",
    "save_level_curves_figure",
]


def save_ndcg_figure(report: MetricReport, path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = np.arange(1, report.meta.get("k_max", len(next(iter(report.ndcg.values())))) + 1)
    for method, curve in report.ndcg.items():
        ax.plot(ks, curve, marker="o", markersize=3, label=method)
        std = report.ndcg_std.get(method)
        if std is not None and np.any(std > 0):
            ax.fill_between(ks, curve - std, curve + std, alpha=0.15)
    ax.set_xlabel("K")
    ax.set_ylabel("mean nDCG@K")
    ax.set_ylim(0, 1.02)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_profile_figure(report: MetricReport, path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    for depth, curve in enumerate(report.front_profile, start=1):
        if np.all(np.isnan(curve)):
            continue
        ax.plot(report.profile_grid, curve, label=f"front {depth}")
    ax.set_xlabel("position along front (tail to tail)")
    ax.set_ylabel("mean unique relevance")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_continuum_figure(table: ContinuumTable, path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(table.ns, table.max_rel_errors, marker="o", label="max over grid")
    ax.loglog(table.ns, table.mean_rel_errors, marker="s", label="mean over grid")
    ax.set_xlabel("n")
    ax.set_ylabel("relative error vs. rate * F(x)^(1/d)")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_level_curves_figure(report: LevelCurveReport, path: str | Path) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    for row in report.levels:
        curve = row.get("curve")
        if curve is None:
            continue
        label = f"level {row['level']:g} (defect {row['defect']:.3f})"
        ax.plot(curve[:, 0], curve[:, 1], ".", markersize=3, label=label)
    ax.set_xlabel("first coordinate")
    ax.set_ylabel("second coordinate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    if any(r.get("curve") is not None for r in report.levels):
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
