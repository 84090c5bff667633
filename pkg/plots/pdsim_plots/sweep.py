"""Single-hall single-SKU stranding sweep: sawtooth per design."""

from __future__ import annotations

import argparse
from collections import defaultdict

from .common import new_axes, read_csv, save, series_color

REQUIRED = ("design", "power_kw", "trial", "stranded_fraction")


def render(csv_path: str, out_path: str) -> str:
    rows = read_csv(csv_path, REQUIRED)
    fig, ax = new_axes(
        "deployment power (kW)", "stranded fraction at saturation"
    )
    by_design: dict[str, dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
    for row in rows:
        by_design[row["design"]][float(row["power_kw"])].append(
            float(row["stranded_fraction"])
        )
    for i, design in enumerate(sorted(by_design)):
        points = sorted(by_design[design].items())
        xs = [p for p, _ in points]
        ys = [sum(v) / len(v) for _, v in points]
        ax.plot(xs, ys, label=design, color=series_color(i), linewidth=1.4)
    if by_design:
        ax.legend(frameon=False, fontsize=8)
    ax.set_ylim(bottom=0)
    return str(save(fig, out_path))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="sweep.csv from `pdsim sweep-single-hall`")
    parser.add_argument("-o", "--out", default="sweep.png")
    args = parser.parse_args(argv)
    print(render(args.csv, args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
