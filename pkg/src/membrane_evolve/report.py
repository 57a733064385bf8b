"""Campaign report artifacts: a CSV of per-generation stats plus trend figures.

The figures are rendered headlessly (no pyplot, no global backend state)
into PNGs named after the CSV so a report directory stays self-describing.
"""

from __future__ import annotations

import math
from pathlib import Path

from matplotlib.figure import Figure

from .campaign import report_csv


def _series(rows: list[dict], key: str) -> list[float]:
    # None (no printable child) plots as a gap
    return [
        math.nan if row[key] is None else row[key] for row in rows
    ]


def _fitness_figure(rows: list[dict]) -> Figure:
    generations = [row["generation"] for row in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot(111)
    ax.plot(generations, _series(rows, "max_f"), marker="o", label="max")
    ax.plot(generations, _series(rows, "mean_f"), marker="s", label="mean")
    ax.set_xlabel("generation")
    ax.set_ylabel("retention force (N)")
    ax.set_title("fitness per generation")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def _similarity_figure(rows: list[dict]) -> Figure:
    generations = [row["generation"] for row in rows]
    fig = Figure(figsize=(6.0, 4.0))
    ax = fig.add_subplot(111)
    ax.plot(
        generations,
        _series(rows, "best_similarity"),
        marker="o",
        label="best gripper",
    )
    ax.plot(
        generations,
        _series(rows, "mean_similarity"),
        marker="s",
        label="population mean",
    )
    ax.set_xlabel("generation")
    ax.set_ylabel("similarity to reference bag")
    ax.set_ylim(0.0, 1.0)
    ax.set_title("bag similarity per generation")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return fig


def write_report(rows: list[dict], csv_path: str | Path) -> list[Path]:
    """Write the CSV plus companion figures; returns every path written."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(report_csv(rows), encoding="utf-8")
    written = [csv_path]
    for suffix, figure in (
        ("fitness", _fitness_figure(rows)),
        ("similarity", _similarity_figure(rows)),
    ):
        path = csv_path.with_name(f"{csv_path.stem}_{suffix}.png")
        figure.savefig(path, dpi=120)
        written.append(path)
    return written
