"""CDFs of line-up stranding across Monte Carlo trials, per policy."""

from __future__ import annotations

import argparse
from collections import defaultdict

import numpy as np

from .common import read_csv, save, series_color

REQUIRED = ("design", "policy", "trial", "lineup_stranded_fraction")


def render(csv_path: str, out_path: str) -> str:
    rows = read_csv(csv_path, REQUIRED)
    designs = sorted({r["design"] for r in rows})
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(
        1, max(1, len(designs)), figsize=(5.2 * max(1, len(designs)) / 1.6, 3.2),
        constrained_layout=True, sharey=True,
    )
    if len(designs) <= 1:
        axes = [axes]
    for ax, design in zip(axes, designs or ["(empty)"]):
        series: dict[str, list[float]] = defaultdict(list)
        for row in rows:
            if row["design"] == design:
                series[row["policy"]].append(float(row["lineup_stranded_fraction"]))
        for i, policy in enumerate(sorted(series)):
            values = np.sort(series[policy])
            cdf = np.arange(1, len(values) + 1) / len(values)
            ax.step(values, cdf, where="post", label=policy, color=series_color(i))
        ax.set_title(design, fontsize=10)
        ax.set_xlabel("line-up stranded fraction")
        ax.grid(True, alpha=0.25, linewidth=0.5)
        if series:
            ax.legend(frameon=False, fontsize=7)
    axes[0].set_ylabel("CDF across trials")
    return str(save(fig, out_path))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="policy.csv from `pdsim policy-compare`")
    parser.add_argument("-o", "--out", default="policy_cdf.png")
    args = parser.parse_args(argv)
    print(render(args.csv, args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
