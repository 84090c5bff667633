"""Deployment trace generation.

Stage 1 turns class-level arrival envelopes into monthly power budgets,
stage 2 assigns per-SKU rack power within each budget, and stage 3
attaches lifecycle metadata (availability tier, harvest schedule,
retirement). The result is a time-ordered, replayable event log that is
a pure function of (config, seed).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np

from .hardware import (
    DEFAULT_SKU_CLUSTERS,
    DeploymentArch,
    HardwareClass,
    Scenario,
    SkuCluster,
    cooling_demand,
    gpu_rack_power,
    nongpu_power_trajectory,
    pod_power,
    sku_power,
)
from .hierarchy import Tier
from .resources import ResourceVector

MONTHS_PER_YEAR = 12
UNIFORM_SEASONALITY = tuple([1.0 / 12] * 12)

# N(mu, sigma) lifetimes in months, truncated below at 12.
LIFETIME_PARAMS = {
    HardwareClass.GPU: (60.0, 6.0),  # 5 +/- 0.5 years
    HardwareClass.COMPUTE: (84.0, 12.0),  # 7 +/- 1 years
    HardwareClass.STORAGE: (84.0, 12.0),
}
MIN_LIFETIME_MONTHS = 12

HARVEST_FRACTION = {
    HardwareClass.GPU: 0.10,
    HardwareClass.COMPUTE: 0.15,
    HardwareClass.STORAGE: 0.15,
}
HARVEST_DELAY_MONTHS = 12


@dataclass(frozen=True)
class ArrivalEnvelope:
    """Annual demand trajectory for one hardware class."""

    klass: HardwareClass
    initial_mw_per_year: float
    growth: float  # fraction/yr compounding on the annual target
    cap_mw_per_year: float
    seasonality: tuple[float, ...] = UNIFORM_SEASONALITY

    def __post_init__(self) -> None:
        if len(self.seasonality) != 12 or any(w < 0 for w in self.seasonality):
            raise ValueError("seasonality needs 12 non-negative weights")
        if abs(sum(self.seasonality) - 1.0) > 1e-9:
            raise ValueError("seasonality weights must sum to 1")
        if self.cap_mw_per_year < self.initial_mw_per_year:
            raise ValueError("cap must be >= initial level")

    def annual_target_mw(self, year_index: int) -> float:
        return min(self.initial_mw_per_year * (1 + self.growth) ** year_index, self.cap_mw_per_year)

    def monthly_budget_kw(self, month: int) -> float:
        year, month_of_year = divmod(month, MONTHS_PER_YEAR)
        return self.annual_target_mw(year) * 1000.0 * self.seasonality[month_of_year]


@dataclass(frozen=True)
class Deployment:
    """One placement-atomic arrival: a rack quantum or a whole GPU pod."""

    id: str
    klass: HardwareClass
    sku_power_kw: float  # per rack
    demand: ResourceVector  # aggregate over the quantum
    tier: Tier
    feeds: int  # k_r: independent feed requirement (2 LD / 4 HD)
    quantum: int  # same-SKU racks co-placed in one row
    pod_racks: int  # 1 for rack-scale arrivals
    arrival_month: int
    lifetime_months: int
    harvest_month: Optional[int]
    harvest_fraction: float

    def __post_init__(self) -> None:
        if self.lifetime_months <= 0:
            raise ValueError("lifetime must be positive")
        if self.tier is Tier.HA and self.klass is HardwareClass.GPU and self.feeds < 2:
            raise ValueError("HA GPU deployments need k_r >= 2")
        limit = HARVEST_FRACTION[self.klass]
        if self.harvest_fraction > limit + 1e-12:
            raise ValueError(f"harvest fraction {self.harvest_fraction} exceeds {limit}")

    @property
    def retire_month(self) -> int:
        return self.arrival_month + self.lifetime_months


@dataclass(frozen=True)
class TraceEvent:
    month: int
    kind: str  # "decommission" | "harvest" | "deploy", applied in that order
    deployment: Optional[Deployment] = None
    deployment_id: str = ""

    ORDER = {"decommission": 0, "harvest": 1, "deploy": 2}

    def sort_key(self, seq: int) -> tuple:
        return (self.month, self.ORDER[self.kind], seq)


@dataclass
class Trace:
    events: list[TraceEvent]
    horizon_months: int
    rng_seed: int
    start_year: int

    def deployments(self) -> list[Deployment]:
        return [e.deployment for e in self.events if e.kind == "deploy"]

    def deployed_kw_by_month(self) -> dict[int, dict[HardwareClass, float]]:
        out: dict[int, dict[HardwareClass, float]] = {}
        for d in self.deployments():
            out.setdefault(d.arrival_month, {}).setdefault(d.klass, 0.0)
            out[d.arrival_month][d.klass] += d.demand.power_kw
        return out

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {
                    "type": "header",
                    "seed": self.rng_seed,
                    "horizon_months": self.horizon_months,
                    "start_year": self.start_year,
                },
                sort_keys=True,
            )
        ]
        for event in self.events:
            record: dict = {"type": event.kind, "month": event.month}
            if event.kind == "deploy":
                d = event.deployment
                record["deployment"] = {
                    "id": d.id,
                    "class": d.klass.value,
                    "sku_power_kw": d.sku_power_kw,
                    "demand": d.demand.as_dict(),
                    "tier": d.tier.value,
                    "feeds": d.feeds,
                    "quantum": d.quantum,
                    "pod_racks": d.pod_racks,
                    "arrival_month": d.arrival_month,
                    "lifetime_months": d.lifetime_months,
                    "harvest_month": d.harvest_month,
                    "harvest_fraction": d.harvest_fraction,
                }
            else:
                record["deployment_id"] = event.deployment_id
            lines.append(json.dumps(record, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        events: list[TraceEvent] = []
        header = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"malformed trace at line {lineno}: {exc}") from exc
            kind = record.get("type")
            if kind == "header":
                header = record
            elif kind == "deploy":
                try:
                    raw = record["deployment"]
                    d = Deployment(
                        id=raw["id"],
                        klass=HardwareClass(raw["class"]),
                        sku_power_kw=raw["sku_power_kw"],
                        demand=ResourceVector(**raw["demand"]),
                        tier=Tier(raw["tier"]),
                        feeds=raw["feeds"],
                        quantum=raw["quantum"],
                        pod_racks=raw["pod_racks"],
                        arrival_month=raw["arrival_month"],
                        lifetime_months=raw["lifetime_months"],
                        harvest_month=raw["harvest_month"],
                        harvest_fraction=raw["harvest_fraction"],
                    )
                except (KeyError, TypeError, ValueError) as exc:
                    raise ValueError(f"malformed trace at line {lineno}: {exc}") from exc
                events.append(TraceEvent(record["month"], "deploy", deployment=d))
            elif kind in ("harvest", "decommission"):
                events.append(
                    TraceEvent(record["month"], kind, deployment_id=record["deployment_id"])
                )
            else:
                raise ValueError(f"malformed trace at line {lineno}: unknown type {kind!r}")
        if header is None:
            raise ValueError("malformed trace: missing header line")
        return cls(
            events=events,
            horizon_months=header["horizon_months"],
            rng_seed=header["seed"],
            start_year=header["start_year"],
        )

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()


def sample_lifetime(klass: HardwareClass, rng: np.random.Generator) -> int:
    mu, sigma = LIFETIME_PARAMS[klass]
    months = mu if sigma == 0 else rng.normal(mu, sigma)
    return max(MIN_LIFETIME_MONTHS, int(round(months)))


def harvest_schedule(d: Deployment, enabled: bool) -> Optional[tuple[int, ResourceVector]]:
    """When and how much the deployment releases back to the fleet."""
    if not enabled or d.harvest_fraction <= 0:
        return None
    return (
        d.arrival_month + HARVEST_DELAY_MONTHS,
        d.demand.harvest_portion(d.harvest_fraction),
    )


@dataclass(frozen=True)
class TraceConfig:
    """Everything generate_trace needs besides the seed."""

    envelopes: tuple[ArrivalEnvelope, ...]
    horizon_months: int
    scenario: Scenario
    start_year: int = 2026
    gpu_arch: Optional[DeploymentArch] = None
    pod_racks: int = 1
    nongpu_quantum: int = 10
    sku_clusters: tuple[SkuCluster, ...] = DEFAULT_SKU_CLUSTERS
    la_fraction: dict = field(default_factory=dict)  # class -> fraction of LA arrivals
    harvest: bool = True
    nongpu_scenario: Scenario = Scenario.MED  # compute/storage track Medium


def _make_deployment(
    cfg: TraceConfig,
    klass: HardwareClass,
    month: int,
    seq: int,
    rng: np.random.Generator,
) -> Deployment:
    year = cfg.start_year + month // MONTHS_PER_YEAR
    tier = Tier.HA
    la_frac = cfg.la_fraction.get(klass, 0.0)
    if la_frac > 0 and rng.random() < la_frac:
        tier = Tier.LA

    if klass is HardwareClass.GPU:
        if cfg.gpu_arch is None:
            raise ValueError("trace config needs a gpu_arch to emit GPU arrivals")
        rack_kw = gpu_rack_power(cfg.gpu_arch, max(year, cfg.gpu_arch.available_from), cfg.scenario)
        racks = cfg.pod_racks
        total_kw = pod_power([rack_kw] * racks)
        demand = cooling_demand(klass, total_kw, racks=racks)
        quantum = racks
        feeds = 4  # HD rows
        sku_kw = rack_kw
    else:
        probs = np.array([c.probability for c in cfg.sku_clusters])
        cluster = cfg.sku_clusters[int(rng.choice(len(cfg.sku_clusters), p=probs / probs.sum()))]
        p_max = nongpu_power_trajectory(klass, year, cfg.nongpu_scenario)
        sku_kw = sku_power(cluster, p_max)
        quantum = cfg.nongpu_quantum
        racks = quantum
        total_kw = sku_kw * quantum
        demand = cooling_demand(klass, total_kw, racks=racks)
        feeds = 2

    lifetime = sample_lifetime(klass, rng)
    fraction = HARVEST_FRACTION[klass] if cfg.harvest else 0.0
    harvest_month = month + HARVEST_DELAY_MONTHS if cfg.harvest else None
    return Deployment(
        id=f"d{seq:06d}",
        klass=klass,
        sku_power_kw=sku_kw,
        demand=demand,
        tier=tier,
        feeds=feeds,
        quantum=quantum,
        pod_racks=cfg.pod_racks if klass is HardwareClass.GPU else 1,
        arrival_month=month,
        lifetime_months=lifetime,
        harvest_month=harvest_month,
        harvest_fraction=fraction,
    )


def generate_trace(cfg: TraceConfig, seed: int) -> Trace:
    """Deterministic trace for (cfg, seed).

    Monthly budgets accrue year-to-date per class, and deployments are
    drawn while cumulative deployed power is below the cumulative
    budget, so a month never overshoots by more than one deployment and
    unfilled budget rolls into later months of the same year.
    """
    if cfg.horizon_months < 1:
        raise ValueError("horizon must be >= 1 month")
    if not cfg.envelopes:
        raise ValueError("at least one arrival envelope is required")

    rng = np.random.Generator(np.random.PCG64(seed))
    events: list[TraceEvent] = []
    seq = 0
    spent_ytd = {env.klass: 0.0 for env in cfg.envelopes}
    budget_ytd = {env.klass: 0.0 for env in cfg.envelopes}

    for month in range(cfg.horizon_months):
        if month % MONTHS_PER_YEAR == 0:
            spent_ytd = {k: 0.0 for k in spent_ytd}
            budget_ytd = {k: 0.0 for k in budget_ytd}
        month_deploys: list[TraceEvent] = []
        for env in cfg.envelopes:
            budget_ytd[env.klass] += env.monthly_budget_kw(month)
            while spent_ytd[env.klass] < budget_ytd[env.klass] - 1e-9:
                d = _make_deployment(cfg, env.klass, month, seq, rng)
                seq += 1
                spent_ytd[env.klass] += d.demand.power_kw
                month_deploys.append(TraceEvent(month, "deploy", deployment=d))
        order = rng.permutation(len(month_deploys))
        for i in order:
            events.append(month_deploys[int(i)])

    for event in list(events):
        d = event.deployment
        if d is None:
            continue
        schedule = harvest_schedule(d, cfg.harvest)
        if schedule is not None and schedule[0] < cfg.horizon_months:
            events.append(TraceEvent(schedule[0], "harvest", deployment_id=d.id))
        if d.retire_month < cfg.horizon_months:
            events.append(TraceEvent(d.retire_month, "decommission", deployment_id=d.id))

    events = [e for _, e in sorted((e.sort_key(i), e) for i, e in enumerate(events))]
    return Trace(
        events=events,
        horizon_months=cfg.horizon_months,
        rng_seed=seed,
        start_year=cfg.start_year,
    )


def single_sku_stream(deployment: Deployment, limit: int = 100000) -> Iterator[Deployment]:
    """Endless copies of one deployment, for mechanism-isolation sweeps."""
    for i in range(limit):
        yield replace(deployment, id=f"{deployment.id}-{i:05d}")


def mixed_stream(
    cfg: TraceConfig,
    class_power_shares: dict[HardwareClass, float],
    rng: np.random.Generator,
    limit: int = 100000,
) -> Iterator[Deployment]:
    """Open-ended mixed-class stream whose expected power mix matches
    the given shares; used by single-hall Monte Carlo runs."""
    classes = sorted(class_power_shares, key=lambda c: c.value)
    probe_cfg = replace(cfg, harvest=cfg.harvest)
    mean_power = {}
    for klass in classes:
        d = _make_deployment(probe_cfg, klass, 0, 0, np.random.Generator(np.random.PCG64(0)))
        if klass is HardwareClass.GPU:
            mean_power[klass] = d.demand.power_kw
        else:
            p_max = nongpu_power_trajectory(klass, cfg.start_year, cfg.nongpu_scenario)
            mean_alpha = sum(c.alpha * c.probability for c in cfg.sku_clusters)
            mean_power[klass] = mean_alpha * p_max * cfg.nongpu_quantum
    weights = np.array([class_power_shares[c] / mean_power[c] for c in classes])
    weights = weights / weights.sum()
    for i in range(limit):
        klass = classes[int(rng.choice(len(classes), p=weights))]
        yield _make_deployment(cfg, klass, 0, i, rng)
