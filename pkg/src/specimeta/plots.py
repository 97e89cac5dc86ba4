"""Figures written next to the CSV quality/validation reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .validate import ReportRow  # noqa: E402

FIG_WIDTH = 8.0
GOLDEN = 0.618


def report_figure(rows: Sequence[ReportRow], pass_threshold: float | None = None):
    """Two panels: label-match score and completeness distributions."""
    scores = [r.validation.score for r in rows if r.validation is not None]
    complete = [r.quality.completeness for r in rows if r.quality is not None]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(FIG_WIDTH, FIG_WIDTH * GOLDEN / 1.6))
    bins = [i / 20 for i in range(21)]

    ax1.hist(scores, bins=bins, color="#4477aa", edgecolor="white")
    if pass_threshold is not None:
        ax1.axvline(pass_threshold, color="#cc3311", linestyle="--", linewidth=1, label=f"pass {pass_threshold:g}")
        ax1.legend(frameon=False, fontsize=8)
    passed = sum(1 for r in rows if r.validation is not None and r.validation.passed)
    ax1.set_title(f"Label validation ({passed}/{len(scores)} pass)", fontsize=10)
    ax1.set_xlabel("matched fraction")
    ax1.set_ylabel("entities")

    ax2.hist(complete, bins=bins, color="#228833", edgecolor="white")
    ax2.set_title("Required-field completeness", fontsize=10)
    ax2.set_xlabel("completeness")

    for ax in (ax1, ax2):
        ax.set_xlim(0, 1)
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
    fig.tight_layout()
    return fig


def save_report_figure(rows: Sequence[ReportRow], path: str | Path, **kwargs) -> Path:
    path = Path(path)
    fig = report_figure(rows, **kwargs)
    try:
        fig.savefig(path, dpi=120, metadata={"Software": None} if path.suffix == ".png" else None)
    finally:
        plt.close(fig)
    return path
