"""Pod payoff versus pod size, per model and design: crossover chart."""

from __future__ import annotations

import argparse
from collections import defaultdict

from .common import new_axes, read_csv, save, series_color

REQUIRED = ("design", "model", "pod_size", "payoff")


def render(csv_path: str, out_path: str) -> str:
    rows = read_csv(csv_path, REQUIRED)
    fig, ax = new_axes("pod size (racks)", "pod payoff vs single rack")
    lines: dict[tuple[str, str], list[tuple[int, float]]] = defaultdict(list)
    for row in rows:
        lines[(row["model"], row["design"])].append(
            (int(row["pod_size"]), float(row["payoff"]))
        )
    styles = {"10N/8": "-", "8+2": "--", "4N/3": "-.", "3+1": ":"}
    models = sorted({m for m, _ in lines})
    for (model, design), points in sorted(lines.items()):
        points.sort()
        ax.plot(
            [p for p, _ in points],
            [v for _, v in points],
            styles.get(design, "-"),
            color=series_color(models.index(model)),
            label=f"{model} / {design}",
            linewidth=1.3,
        )
    ax.axhline(0.0, color="grey", linewidth=0.8)
    if lines:
        ax.legend(frameon=False, fontsize=6)
    return str(save(fig, out_path))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="payoff.csv from `pdsim payoff`")
    parser.add_argument("-o", "--out", default="payoff.png")
    args = parser.parse_args(argv)
    print(render(args.csv, args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
