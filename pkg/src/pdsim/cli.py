"""Command-line orchestration for all experiments.

Commands:
    sweep-single-hall  single-SKU stranding sweep over deployment power
    policy-compare     single-hall Monte Carlo across placement policies
    run-fleet          multi-year fleet lifecycle simulation
    payoff             pod payoff: fleet cost deltas x TPS/W deltas
    trace-gen          emit a deployment trace as a JSONL event log
    replay             run the fleet simulation from an emitted trace

Every command is reproducible from (config, seed): outputs are UTF-8
CSV with a fixed column order plus `# key: value` header comments that
embed the config digest and seed. A JSON summary lands next to each
CSV. PDSIM_OUT and PDSIM_WORKERS override the output directory and
worker count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import metrics, perfmodel
from .arrivals import Deployment, Trace, generate_trace, mixed_stream, single_sku_stream
from .config import ExperimentConfig
from .hardware import ARCHS, HardwareClass, Scenario, cooling_demand
from .hierarchy import HallDesign, Tier, named_design
from .placement import FleetRun, Policy, fleet_sim, single_hall_mc

FLOAT_FMT = "%.10g"


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def write_csv(path: Path, comments: dict, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(comments):
            fh.write(f"# {key}: {comments[key]}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_summary(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _sweep_deployment(power_kw: float) -> Deployment:
    """Generic air-cooled single-rack SKU used by the mechanism sweep."""
    return Deployment(
        id="sweep",
        klass=HardwareClass.COMPUTE,
        sku_power_kw=power_kw,
        demand=cooling_demand(HardwareClass.COMPUTE, power_kw, racks=1),
        tier=Tier.HA,
        feeds=2,
        quantum=1,
        pod_racks=1,
        arrival_month=0,
        lifetime_months=60,
        harvest_month=None,
        harvest_fraction=0.0,
    )


def _sweep_point(args: tuple) -> list[tuple]:
    raw, design_name, power_kw, trials, seed, harvest = args
    design = named_design(design_name)
    sku = _sweep_deployment(power_kw)
    results = single_hall_mc(
        design,
        lambda rng: single_sku_stream(sku),
        trials=trials,
        seed=seed,
        probes_fn=lambda: [sku],
        policy=Policy(raw.get("policy", "variance-min")),
        harvest=harvest,
    )
    rows = []
    for res in results:
        rows.append(
            (
                design_name,
                power_kw,
                res.trial,
                res.stranding.site_stranded_fraction(),
                res.placed,
            )
        )
    return rows


def cmd_sweep_single_hall(cfg: ExperimentConfig, out_dir: Path, seed: int, workers: int) -> Path:
    sweep = cfg.raw.get("sweep", {})
    start = float(sweep.get("start_kw", 100.0))
    stop = float(sweep.get("stop_kw", 1300.0))
    points = int(sweep.get("points", 200))
    trials = cfg.trials()
    harvest = bool(cfg.raw.get("harvest", False))
    grid = np.linspace(start, stop, points) if points > 0 else np.array([])

    tasks = [
        (cfg.raw, d.label(), float(p), trials, seed, harvest)
        for d in cfg.designs()
        for p in grid
    ]
    rows: list[tuple] = []
    for chunk in _run_tasks(_sweep_point, tasks, workers):
        rows.extend(chunk)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))

    path = out_dir / "sweep.csv"
    write_csv(
        path,
        {"config_digest": cfg.digest(), "seed": seed, "command": "sweep-single-hall"},
        ("design", "power_kw", "trial", "stranded_fraction", "placed"),
        rows,
    )
    return path


def _policy_point(args: tuple) -> list[tuple]:
    raw, design_name, policy_name, trials, seed = args
    cfg = ExperimentConfig(raw)
    design = named_design(design_name)
    trace_cfg = cfg.trace_config()
    shares = {
        HardwareClass(k): float(v)
        for k, v in raw.get(
            "class_power_shares", {"gpu": 0.6, "compute": 0.28, "storage": 0.12}
        ).items()
    }
    year = int(raw.get("start_year", 2028))

    def probes() -> list[Deployment]:
        return metrics.smallest_probes(
            year,
            cfg.scenario(),
            cfg.gpu_arch(),
            pod_racks=trace_cfg.pod_racks,
            nongpu_quantum=trace_cfg.nongpu_quantum,
        )

    results = single_hall_mc(
        design,
        lambda rng: mixed_stream(trace_cfg, shares, rng),
        trials=trials,
        seed=seed,
        probes_fn=probes,
        policy=Policy(policy_name),
        harvest=bool(raw.get("harvest", True)),
        class_weights={k.value: v for k, v in shares.items()},
    )
    rows = []
    for res in results:
        hall = res.stranding.halls[0]
        rows.append(
            (
                design_name,
                policy_name,
                res.trial,
                hall.lineup_stranded_fraction(),
                res.stranding.site.load,
            )
        )
    return rows


def cmd_policy_compare(cfg: ExperimentConfig, out_dir: Path, seed: int, workers: int) -> Path:
    trials = cfg.trials()
    tasks = [
        (cfg.raw, d.label(), p.value, trials, seed)
        for d in cfg.designs()
        for p in cfg.policies()
    ]
    rows: list[tuple] = []
    for chunk in _run_tasks(_policy_point, tasks, workers):
        rows.extend(chunk)
    rows.sort(key=lambda r: (r[0], r[1], r[2]))
    path = out_dir / "policy.csv"
    write_csv(
        path,
        {"config_digest": cfg.digest(), "seed": seed, "command": "policy-compare"},
        ("design", "policy", "trial", "lineup_stranded_fraction", "deployed_kw"),
        rows,
    )
    return path


def _fleet_rows(
    run: FleetRun, design_name: str, scenario: Scenario, pod_racks: int, seed: int
) -> list[tuple]:
    rows = []
    for snap in run.snapshots:
        rows.append(
            (
                snap.month,
                design_name,
                scenario.value,
                pod_racks,
                sum(snap.deployed_mw.values()),
                snap.provisioned_mw,
                snap.stranded_fraction_p50,
                snap.stranded_fraction_p90,
                snap.halls_built,
                seed,
            )
        )
    return rows


FLEET_COLUMNS = (
    "time",
    "design",
    "scenario",
    "pod_size",
    "deployed_MW",
    "provisioned_MW",
    "stranded_fraction_p50",
    "stranded_fraction_p90",
    "halls_built",
    "seed",
)


def demand_class_weights(cfg: ExperimentConfig) -> dict[str, float]:
    """Class power shares of the configured demand, for stranding weights."""
    horizon_years = max(1, int(cfg.raw.get("horizon_months", 108)) // 12)
    totals: dict[str, float] = {}
    for env in cfg.envelopes():
        totals[env.klass.value] = sum(env.annual_target_mw(y) for y in range(horizon_years))
    total = sum(totals.values())
    if total <= 0:
        return {k: 1.0 for k in totals}
    return {k: v / total for k, v in totals.items()}


def run_one_fleet(
    cfg: ExperimentConfig,
    design: HallDesign,
    seed: int,
    pod_racks: Optional[int] = None,
    trace: Optional[Trace] = None,
) -> FleetRun:
    trace_cfg = cfg.trace_config(pod_racks=pod_racks)
    if trace is None:
        trace = generate_trace(trace_cfg, seed)
    scenario = cfg.scenario()
    arch = cfg.gpu_arch()

    def probes(month: int) -> list[Deployment]:
        year = trace_cfg.start_year + month // 12
        return metrics.smallest_probes(
            year,
            scenario,
            arch,
            pod_racks=trace_cfg.pod_racks,
            nongpu_quantum=trace_cfg.nongpu_quantum,
        )

    return fleet_sim(
        [design],
        trace,
        policy=cfg.policy(),
        seed=seed,
        probes_fn=probes,
        snapshot_every=int(cfg.raw.get("snapshot_every", 3)),
        class_weights=demand_class_weights(cfg),
    )


def _fleet_point(args: tuple) -> tuple[list[tuple], dict]:
    raw, design_name, seed, pod_racks = args
    cfg = ExperimentConfig(raw)
    design = named_design(design_name)
    run = run_one_fleet(cfg, design, seed, pod_racks=pod_racks)
    rows = _fleet_rows(run, design_name, cfg.scenario(), pod_racks or int(raw.get("pod_racks", 1)), seed)
    capex = metrics.hall_capex(design)
    deployed_mw = run.state.total_load_kw() / 1000.0
    halls = run.state.halls_built
    summary = {
        "design": design_name,
        "seed": seed,
        "pod_racks": pod_racks or int(raw.get("pod_racks", 1)),
        "halls_built": halls,
        "deployed_mw": deployed_mw,
        "capex_usd": capex * halls,
        "effective_cost_usd_per_mw": (
            metrics.effective_cost([(capex * halls, deployed_mw)]) if deployed_mw > 0 else None
        ),
        "initial_cost_usd_per_mw": metrics.initial_cost_per_mw(design),
        "rejected_mw": run.snapshots[-1].rejected_mw if run.snapshots else 0.0,
        "final_p90_stranded_fraction": (
            run.snapshots[-1].stranded_fraction_p90 if run.snapshots else 0.0
        ),
    }
    return rows, summary


def cmd_run_fleet(cfg: ExperimentConfig, out_dir: Path, seed: int, workers: int) -> Path:
    seeds = cfg.seeds() if seed is None else [seed]
    tasks = [
        (cfg.raw, d.label(), s, None)
        for d in cfg.designs()
        for s in seeds
    ]
    rows: list[tuple] = []
    summaries = []
    for out in _run_tasks(_fleet_point, tasks, workers):
        chunk, summary = out
        rows.extend(chunk)
        summaries.append(summary)
    rows.sort(key=lambda r: (r[1], r[9], r[0]))
    summaries.sort(key=lambda s: (s["design"], s["seed"]))

    path = out_dir / "fleet.csv"
    write_csv(
        path,
        {"config_digest": cfg.digest(), "seed": seeds[0], "command": "run-fleet"},
        FLEET_COLUMNS,
        rows,
    )
    write_summary(out_dir / "fleet_summary.json", {"runs": summaries, "config_digest": cfg.digest()})
    return path


def cmd_payoff(cfg: ExperimentConfig, out_dir: Path, seed: int, workers: int) -> Path:
    perf_cfg = cfg.raw.get("perf", {})
    perf_arch = ARCHS[perf_cfg.get("arch", "vera-rubin-nvl72")]
    perf_year = int(perf_cfg.get("year", 2030))
    perf_scenario = Scenario(perf_cfg.get("scenario", "med"))
    pod_sizes = [int(n) for n in cfg.raw.get("pod_sizes", [1, 3, 4, 5, 6, 7])]
    if 1 not in pod_sizes:
        pod_sizes = [1] + pod_sizes
    model_names = cfg.raw.get("models")
    models = [m for m in perfmodel.MODEL_SUITE if model_names is None or m.name in model_names]

    # Throughput side: TPS and TPS/W per (model, pod size) on the perf arch.
    perf_rows = []
    tpsw: dict[tuple[str, int], float] = {}
    for model in models:
        for n in pod_sizes:
            d = perfmodel.build_deployment(model, perf_arch, perf_year, perf_scenario, pod_racks=n)
            tps = perfmodel.request_tps(model, d)
            watt = perfmodel.tps_per_watt(model, d)
            tpsw[(model.name, n)] = watt
            perf_rows.append(
                (model.name, perf_arch.name, perf_year, perf_scenario.value, n, tps, watt)
            )
    write_csv(
        out_dir / "perf.csv",
        {"config_digest": cfg.digest(), "seed": seed, "command": "payoff"},
        ("model", "arch", "year", "scenario", "pod_size", "tps", "tps_per_watt"),
        perf_rows,
    )

    # Cost side: effective $/MW per (design, pod size) from fleet runs.
    tasks = [
        (cfg.raw, d.label(), seed, n)
        for d in cfg.designs()
        for n in pod_sizes
    ]
    cost: dict[tuple[str, int], float] = {}
    fleet_rows: list[tuple] = []
    for out in _run_tasks(_fleet_point, tasks, workers):
        chunk, summary = out
        fleet_rows.extend(chunk)
        cost[(summary["design"], summary["pod_racks"])] = summary["effective_cost_usd_per_mw"]
    fleet_rows.sort(key=lambda r: (r[1], r[3], r[0]))
    write_csv(
        out_dir / "payoff_fleet.csv",
        {"config_digest": cfg.digest(), "seed": seed, "command": "payoff"},
        FLEET_COLUMNS,
        fleet_rows,
    )

    payoff_rows = []
    for design in cfg.designs():
        base_cost = cost[(design.label(), 1)]
        for model in models:
            base_tpsw = tpsw[(model.name, 1)]
            for n in pod_sizes:
                delta_cost = cost[(design.label(), n)] / base_cost - 1.0
                delta_tpsw = tpsw[(model.name, n)] / base_tpsw - 1.0
                payoff_rows.append(
                    (
                        design.label(),
                        model.name,
                        n,
                        delta_tpsw,
                        delta_cost,
                        metrics.pod_payoff(delta_tpsw, delta_cost),
                    )
                )
    path = out_dir / "payoff.csv"
    write_csv(
        path,
        {"config_digest": cfg.digest(), "seed": seed, "command": "payoff"},
        ("design", "model", "pod_size", "delta_tps_per_watt", "delta_cost", "payoff"),
        payoff_rows,
    )
    return path


def cmd_trace_gen(cfg: ExperimentConfig, out_dir: Path, seed: int) -> Path:
    trace = generate_trace(cfg.trace_config(), seed)
    path = out_dir / "trace.jsonl"
    path.parent.mkdir(parents=True, exist_ok=True)
    header = json.dumps(
        {"type": "meta", "config_digest": cfg.digest(), "seed": seed}, sort_keys=True
    )
    path.write_text(header + "\n" + trace.to_jsonl(), encoding="utf-8")
    return path


def cmd_replay(cfg: ExperimentConfig, trace_path: str, out_dir: Path, seed: int, workers: int) -> Path:
    text = Path(trace_path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if lines:
        try:
            first = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise SystemExit(f"replay: malformed trace at line 1: {exc}")
        if first.get("type") == "meta":
            text = "\n".join(lines[1:]) + "\n"
    trace = Trace.from_jsonl(text)

    rows: list[tuple] = []
    for design in cfg.designs():
        run = run_one_fleet(cfg, design, trace.rng_seed, trace=trace)
        rows.extend(
            _fleet_rows(run, design.label(), cfg.scenario(), int(cfg.raw.get("pod_racks", 1)), trace.rng_seed)
        )
    rows.sort(key=lambda r: (r[1], r[9], r[0]))
    path = out_dir / "fleet.csv"
    write_csv(
        path,
        {"config_digest": cfg.digest(), "seed": trace.rng_seed, "command": "run-fleet"},
        FLEET_COLUMNS,
        rows,
    )
    return path


def _run_tasks(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdsim",
        description="Lifecycle evaluation of datacenter power-delivery designs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("sweep-single-hall", "policy-compare", "run-fleet", "payoff", "trace-gen", "replay"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config path", default=None)
        p.add_argument("--preset", help="named preset", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--scenario", choices=[s.value for s in Scenario], default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None)
        if name == "replay":
            p.add_argument("trace", help="trace JSONL emitted by trace-gen")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {}
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.scenario is not None:
        overrides["scenario"] = args.scenario
    if args.seed is not None:
        overrides["seeds"] = [args.seed]
    cfg = ExperimentConfig.load(args.preset, args.config, overrides)
    out_dir = Path(args.out or os.environ.get("PDSIM_OUT", "out"))
    workers = args.workers or int(os.environ.get("PDSIM_WORKERS", "1"))
    seed = args.seed if args.seed is not None else cfg.seeds()[0]

    if args.command == "sweep-single-hall":
        path = cmd_sweep_single_hall(cfg, out_dir, seed, workers)
    elif args.command == "policy-compare":
        path = cmd_policy_compare(cfg, out_dir, seed, workers)
    elif args.command == "run-fleet":
        path = cmd_run_fleet(cfg, out_dir, args.seed, workers)
    elif args.command == "payoff":
        path = cmd_payoff(cfg, out_dir, seed, workers)
    elif args.command == "trace-gen":
        path = cmd_trace_gen(cfg, out_dir, seed)
    else:
        path = cmd_replay(cfg, args.trace, out_dir, seed, workers)
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
