"""Manifest runner: render every figure whose input exists in a run
directory. Inputs are the CSV/JSON files the simulator CLI emits."""

from __future__ import annotations

import argparse
from pathlib import Path

from . import cost_decomposition, cost_vs_tpsw, fleet_timeseries, payoff, policy_cdf, sweep

MANIFEST = (
    ("sweep.csv", sweep.render, "sweep.png"),
    ("policy.csv", policy_cdf.render, "policy_cdf.png"),
    ("fleet.csv", fleet_timeseries.render, "fleet_p90.png"),
    ("fleet_summary.json", cost_decomposition.render, "cost_decomposition.png"),
    ("payoff.csv", cost_vs_tpsw.render, "cost_vs_tpsw.png"),
    ("payoff.csv", payoff.render, "payoff.png"),
)


def render_all(run_dir: str | Path, out_dir: str | Path | None = None) -> list[Path]:
    run_dir = Path(run_dir)
    out_dir = Path(out_dir) if out_dir else run_dir / "figures"
    rendered = []
    for input_name, renderer, output_name in MANIFEST:
        source = run_dir / input_name
        if not source.exists():
            continue
        rendered.append(Path(renderer(str(source), str(out_dir / output_name))))
    return rendered


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("run_dir", help="directory holding pdsim CSV outputs")
    parser.add_argument("-o", "--out", default=None, help="figure output directory")
    args = parser.parse_args(argv)
    for path in render_all(args.run_dir, args.out):
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
