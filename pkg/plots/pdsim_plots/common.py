"""Shared CSV parsing and figure plumbing for the pdsim plot scripts.

All scripts read the simulator's documented CSV schemas (UTF-8, `#`
header comments, fixed column order), never mutate their inputs, and
write deterministic PNGs.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

# Okabe-Ito colorblind-safe cycle.
PALETTE = [
    "#0072B2",
    "#D55E00",
    "#009E73",
    "#CC79A7",
    "#E69F00",
    "#56B4E9",
    "#000000",
]

DPI = 150


class MissingColumns(SystemExit):
    def __init__(self, path, missing):
        names = ", ".join(sorted(missing))
        super().__init__(f"{path}: missing required column(s): {names}")


def read_csv(path: str | Path, required: tuple[str, ...]) -> list[dict]:
    """Rows as dicts; `#` comment lines skipped; missing columns are a
    named-column failure."""
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    if not lines:
        raise MissingColumns(path, required)
    reader = csv.DictReader(lines)
    missing = set(required) - set(reader.fieldnames or ())
    if missing:
        raise MissingColumns(path, missing)
    return list(reader)


def new_axes(xlabel: str, ylabel: str, title: str = ""):
    fig, ax = plt.subplots(figsize=(5.2, 3.4), constrained_layout=True)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title, fontsize=10)
    ax.grid(True, alpha=0.25, linewidth=0.5)
    return fig, ax


def save(fig, out_path: str | Path) -> Path:
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=DPI, format="png")
    plt.close(fig)
    return out_path


def series_color(index: int) -> str:
    return PALETTE[index % len(PALETTE)]
