"""Render figure analogues from soclab CSV files.

Figures 1 to 5 are expected-performance curves: mean out-of-sample value
against the sample size N, one series per method, with standard-error bars.
Figure 6 is a signed heat map of the SDP-minus-MPC value over a grid of
two-sample pairs, drawn with a diverging scale centered at zero so the sign
is visually faithful.

This package never recomputes statistics; it only reshapes what the CSV
already contains.  Input schemas are those written by the ``soclab`` CLI.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PERFORMANCE_COLUMNS = (
    "study_id",
    "method",
    "N",
    "beta",
    "distribution",
    "value_mean",
    "value_stderr",
    "realizations",
    "seed",
    "inner_mode",
)

MAP_COLUMNS = ("study_id", "p1", "p2", "value_diff", "beta", "distribution", "seed", "inner_mode")

FIGSIZE = (7.0, 4.5)
DPI = 150

METHOD_STYLE = {
    "sdp": {"color": "#1f77b4", "marker": "o", "label": "SDP"},
    "mpc": {"color": "#d62728", "marker": "s", "label": "MPC"},
}


class SchemaError(ValueError):
    """CSV columns do not match the expected schema."""

    def __init__(self, expected, found):
        self.missing = sorted(set(expected) - set(found))
        self.unexpected = sorted(set(found) - set(expected))
        super().__init__(
            f"schema mismatch: missing columns {self.missing}, unexpected {self.unexpected}"
        )


@dataclass(frozen=True)
class FigureJob:
    input_csv: Path
    figure_id: int
    output_image: Path

    def __post_init__(self):
        if not 1 <= int(self.figure_id) <= 6:
            raise ValueError(f"figure id must be 1..6, got {self.figure_id}")


def _read_rows(path: Path, expected) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or tuple(reader.fieldnames) != tuple(expected):
            raise SchemaError(expected, reader.fieldnames or ())
        return list(reader)


def _render_performance(rows: list[dict], ax, title: str) -> None:
    for method, style in METHOD_STYLE.items():
        sel = sorted(
            (r for r in rows if r["method"] == method), key=lambda r: int(r["N"])
        )
        if not sel:
            continue
        n = np.array([int(r["N"]) for r in sel])
        mean = np.array([float(r["value_mean"]) for r in sel])
        err = np.array([float(r["value_stderr"]) for r in sel])
        ax.errorbar(n, mean, yerr=err, capsize=3, lw=1.4, ms=4, **style)
    ax.set_xlabel("sample size N")
    ax.set_ylabel("expected out-of-sample value")
    ax.set_title(title)
    if rows:
        ns = {int(r["N"]) for r in rows}
        if max(ns) / max(min(ns), 1) >= 8:
            ax.set_xscale("log")
            ax.set_xticks(sorted(ns))
            ax.get_xaxis().set_major_formatter(matplotlib.ticker.ScalarFormatter())
        ax.legend()


def _render_map(rows: list[dict], ax, fig, title: str) -> None:
    if not rows:
        ax.set_xlabel("first sample")
        ax.set_ylabel("second sample")
        ax.set_title(title)
        return
    p1 = np.array(sorted({float(r["p1"]) for r in rows}))
    p2 = np.array(sorted({float(r["p2"]) for r in rows}))
    grid = np.full((p1.size, p2.size), np.nan)
    i1 = {v: i for i, v in enumerate(p1)}
    i2 = {v: i for i, v in enumerate(p2)}
    for r in rows:
        grid[i1[float(r["p1"])], i2[float(r["p2"])]] = float(r["value_diff"])
    scale = max(float(np.nanmax(np.abs(grid))), 1e-30)
    mesh = ax.pcolormesh(
        p2, p1, grid, cmap="RdBu_r", vmin=-scale, vmax=scale, shading="nearest"
    )
    fig.colorbar(mesh, ax=ax, label="SDP value minus MPC value")
    ax.set_xlabel("second sample")
    ax.set_ylabel("first sample")
    ax.set_title(title)


def render(job: FigureJob) -> Path:
    """Render the job's figure to its output path and return that path."""
    expected = MAP_COLUMNS if job.figure_id == 6 else PERFORMANCE_COLUMNS
    rows = _read_rows(Path(job.input_csv), expected)
    title = rows[0]["distribution"] if rows else f"figure {job.figure_id}"
    fig, ax = plt.subplots(figsize=FIGSIZE)
    try:
        if job.figure_id == 6:
            _render_map(rows, ax, fig, title)
        else:
            _render_performance(rows, ax, title)
        fig.tight_layout()
        fig.savefig(job.output_image, dpi=DPI)
    finally:
        plt.close(fig)
    return Path(job.output_image)
