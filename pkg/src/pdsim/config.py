"""Experiment configuration: JSON schema, presets, digests.

One JSON document drives every command. Named sections cover hall
designs, the demand envelopes, simulation options, the sweep grid, and
the payoff study. Every output file embeds the config digest and seed
so a run can be reproduced byte-for-byte.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from typing import Optional

from .arrivals import ArrivalEnvelope, TraceConfig
from .hardware import ARCHS, DeploymentArch, HardwareClass, Scenario
from .hierarchy import HallDesign, named_design
from .placement import Policy

# ~0.5 GW cumulative over 2026-2034 at the evaluation's 60/28/12
# GPU/compute/storage power mix.
DESK_ENVELOPES = [
    {"class": "gpu", "initial_mw_per_year": 13.5, "growth": 0.25, "cap_mw_per_year": 50.0},
    {"class": "compute", "initial_mw_per_year": 9.4, "growth": 0.12, "cap_mw_per_year": 25.0},
    {"class": "storage", "initial_mw_per_year": 4.4, "growth": 0.10, "cap_mw_per_year": 12.0},
]

PAYOFF_ENVELOPES = [
    {"class": "gpu", "initial_mw_per_year": 10.0, "growth": 0.25, "cap_mw_per_year": 40.0},
    {"class": "compute", "initial_mw_per_year": 5.0, "growth": 0.10, "cap_mw_per_year": 15.0},
    {"class": "storage", "initial_mw_per_year": 2.0, "growth": 0.08, "cap_mw_per_year": 6.0},
]

PRESETS: dict[str, dict] = {
    # Table-2 class mix scaled from 10 GW to desk scale (~0.5 GW).
    "table2-desk": {
        "designs": ["4N/3", "3+1", "8+2", "10N/8"],
        "scenario": "med",
        "policy": "variance-min",
        "seeds": [0],
        "horizon_months": 108,
        "start_year": 2026,
        "gpu_arch": "vera-rubin-nvl72",
        "pod_racks": 3,
        "nongpu_quantum": 10,
        "harvest": True,
        "envelopes": DESK_ENVELOPES,
        "snapshot_every": 3,
    },
    # Single-hall, single-SKU mechanism sweep; harvesting off to isolate
    # the topology effects.
    "fig6-sweep": {
        "designs": ["4N/3", "3+1"],
        "policy": "variance-min",
        "seeds": [0],
        "trials": 20,
        "harvest": False,
        "sweep": {"start_kw": 100.0, "stop_kw": 1300.0, "points": 200},
    },
    # Mixed-class single-hall Monte Carlo across all four policies.
    # Year and rack case put GPU deployment granularity at the level
    # where placement policy visibly moves line-up stranding.
    "fig7-policy": {
        "designs": ["10N/8", "8+2"],
        "policies": ["min-waste", "random", "round-robin", "variance-min"],
        "scenario": "med",
        "seeds": [0],
        "trials": 100,
        "start_year": 2031,
        "gpu_arch": "kyber-rubin-ultra",
        "pod_racks": 1,
        "nongpu_quantum": 10,
        "harvest": True,
        "class_power_shares": {"gpu": 0.6, "compute": 0.28, "storage": 0.12},
    },
    # Pod payoff: fleet cost deltas per pod size joined with throughput
    # per watt deltas from the perf model.
    "payoff-grid": {
        "designs": ["10N/8", "8+2"],
        "scenario": "med",
        "policy": "variance-min",
        "seeds": [0],
        "horizon_months": 108,
        "start_year": 2026,
        "gpu_arch": "vera-rubin-nvl72",
        "pod_sizes": [1, 3, 4, 5, 6, 7],
        "nongpu_quantum": 10,
        "harvest": True,
        "envelopes": PAYOFF_ENVELOPES,
        "snapshot_every": 6,
        "perf": {"arch": "vera-rubin-nvl72", "year": 2030, "scenario": "med"},
        "models": ["moe-0.6t", "moe-5t", "moe-19t", "moe-51t", "moe-132t", "moe-401t"],
    },
}


@dataclass
class ExperimentConfig:
    raw: dict

    @classmethod
    def load(
        cls,
        preset: Optional[str] = None,
        config_path: Optional[str] = None,
        overrides: Optional[dict] = None,
    ) -> "ExperimentConfig":
        base: dict = {}
        if preset:
            if preset not in PRESETS:
                raise KeyError(f"unknown preset {preset!r}; known: {sorted(PRESETS)}")
            base = copy.deepcopy(PRESETS[preset])
        if config_path:
            with open(config_path) as fh:
                base.update(json.load(fh))
        if overrides:
            base.update({k: v for k, v in overrides.items() if v is not None})
        if not base:
            raise ValueError("no configuration: pass --preset and/or --config")
        return cls(raw=base)

    def digest(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    # -- resolved views ----------------------------------------------------

    def designs(self) -> list[HallDesign]:
        out = []
        for entry in self.raw.get("designs", []):
            if isinstance(entry, str):
                out.append(named_design(entry))
            else:
                out.append(named_design(entry["name"], **{
                    k: v for k, v in entry.items() if k != "name"
                }))
        if not out:
            raise ValueError("config has no designs")
        return out

    def scenario(self) -> Scenario:
        return Scenario(self.raw.get("scenario", "med"))

    def policy(self) -> Policy:
        return Policy(self.raw.get("policy", "variance-min"))

    def policies(self) -> list[Policy]:
        names = self.raw.get("policies")
        if names:
            return [Policy(n) for n in names]
        return [self.policy()]

    def seeds(self) -> list[int]:
        return list(self.raw.get("seeds", [0]))

    def trials(self) -> int:
        return int(self.raw.get("trials", 20))

    def gpu_arch(self) -> DeploymentArch:
        name = self.raw.get("gpu_arch", "vera-rubin-nvl72")
        if name not in ARCHS:
            raise KeyError(f"unknown gpu arch {name!r}; known: {sorted(ARCHS)}")
        return ARCHS[name]

    def envelopes(self) -> list[ArrivalEnvelope]:
        out = []
        for raw in self.raw.get("envelopes", []):
            out.append(
                ArrivalEnvelope(
                    klass=HardwareClass(raw["class"]),
                    initial_mw_per_year=float(raw["initial_mw_per_year"]),
                    growth=float(raw["growth"]),
                    cap_mw_per_year=float(raw["cap_mw_per_year"]),
                    seasonality=tuple(raw.get("seasonality", [1.0 / 12] * 12)),
                )
            )
        return out

    def trace_config(self, pod_racks: Optional[int] = None) -> TraceConfig:
        return TraceConfig(
            envelopes=tuple(self.envelopes()),
            horizon_months=int(self.raw.get("horizon_months", 108)),
            scenario=self.scenario(),
            start_year=int(self.raw.get("start_year", 2026)),
            gpu_arch=self.gpu_arch(),
            pod_racks=int(pod_racks if pod_racks is not None else self.raw.get("pod_racks", 1)),
            nongpu_quantum=int(self.raw.get("nongpu_quantum", 10)),
            harvest=bool(self.raw.get("harvest", True)),
        )
