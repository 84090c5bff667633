"""Effective cost versus throughput per watt: one marker per
(design, model, pod size) combination."""

from __future__ import annotations

import argparse

from .common import new_axes, read_csv, save, series_color

REQUIRED_PAYOFF = ("design", "model", "pod_size", "delta_tps_per_watt", "delta_cost")


def render(payoff_csv: str, out_path: str) -> str:
    rows = read_csv(payoff_csv, REQUIRED_PAYOFF)
    fig, ax = new_axes(
        "effective cost increase vs single rack", "TPS/W gain vs single rack"
    )
    models = sorted({r["model"] for r in rows})
    markers = {"10N/8": "o", "8+2": "s", "4N/3": "^", "3+1": "D"}
    for i, model in enumerate(models):
        for design in sorted({r["design"] for r in rows}):
            xs = [
                float(r["delta_cost"])
                for r in rows
                if r["model"] == model and r["design"] == design
            ]
            ys = [
                float(r["delta_tps_per_watt"])
                for r in rows
                if r["model"] == model and r["design"] == design
            ]
            ax.scatter(
                xs, ys, s=22, color=series_color(i),
                marker=markers.get(design, "o"),
                label=f"{model} / {design}",
            )
    ax.axline((0, 0), slope=1, color="grey", linewidth=0.8, linestyle="--")
    if models:
        ax.legend(frameon=False, fontsize=6)
    return str(save(fig, out_path))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="payoff.csv from `pdsim payoff`")
    parser.add_argument("-o", "--out", default="cost_vs_tpsw.png")
    args = parser.parse_args(argv)
    print(render(args.csv, args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
