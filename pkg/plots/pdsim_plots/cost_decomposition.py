"""Initial vs effective $/MW per design: bars decomposing the excess."""

from __future__ import annotations

import argparse
import json
from collections import defaultdict
from pathlib import Path

import numpy as np

from .common import new_axes, save, series_color


def render(summary_path: str, out_path: str) -> str:
    payload = json.loads(Path(summary_path).read_text())
    runs = payload.get("runs", [])
    per_design: dict[str, list[dict]] = defaultdict(list)
    for run in runs:
        missing = {"design", "initial_cost_usd_per_mw", "effective_cost_usd_per_mw"} - set(run)
        if missing:
            raise SystemExit(
                f"{summary_path}: missing required column(s): {', '.join(sorted(missing))}"
            )
        per_design[run["design"]].append(run)

    fig, ax = new_axes("design", "$M per deployed MW")
    designs = sorted(per_design)
    initial = [per_design[d][0]["initial_cost_usd_per_mw"] / 1e6 for d in designs]
    effective = [
        float(np.mean([r["effective_cost_usd_per_mw"] for r in per_design[d]])) / 1e6
        for d in designs
    ]
    x = np.arange(len(designs))
    ax.bar(x, initial, width=0.6, color=series_color(0), label="base $/MW")
    excess = [max(0.0, e - i) for i, e in zip(initial, effective)]
    ax.bar(
        x, excess, width=0.6, bottom=initial,
        color=series_color(1), label="stranding-induced excess",
    )
    ax.set_xticks(x, designs)
    if designs:
        ax.legend(frameon=False, fontsize=8)
    return str(save(fig, out_path))


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("summary", help="fleet_summary.json from `pdsim run-fleet`")
    parser.add_argument("-o", "--out", default="cost_decomposition.png")
    args = parser.parse_args(argv)
    print(render(args.summary, args.out))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
