"""Tail (P90) stranding over the fleet lifecycle, one line per design."""

from __future__ import annotations

import argparse
from collections import defaultdict

import numpy as np

from .common import new_axes, read_csv, save, series_color

REQUIRED = ("time", "design", "scenario", "stranded_fraction_p90")


def render(csv_path: str, out_path: str) -> str:
    rows = read_csv(csv_path, REQUIRED)
    fig, ax = new_axes("month", "P90 hall stranded fraction")
    groups: dict[str, dict[int, list[float]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        label = f"{row['design']} ({row['scenario']})"
        groups[label][int(row["time"])].append(float(row["stranded_fraction_p90"]))
    for i, label in enumerate(sorted(groups)):
        months = sorted(groups[label])
        med = [float(np.median(groups[label][m])) for m in months]
        lo = [float(np.min(groups[label][m])) for m in months]
        hi = [float(np.max(groups[label][m])) for m in months]
        color = series_color(i)
        ax.plot(months, med, label=label, color=color, linewidth=1.4)
        if any(a != b for a, b in zip(lo, hi)):
            ax.fill_between(months, lo, hi, color=color, alpha=0.15, linewidth=0)
    if groups:
        ax.legend(frameon=False, fontsize=8)
    ax.set_ylim(bottom=0)
    return str(save(fig, out_path))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="fleet.csv from `pdsim run-fleet`")
    parser.add_argument("-o", "--out", default="fleet_p90.png")
    args = parser.parse_args(argv)
    print(render(args.csv, args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
