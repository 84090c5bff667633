"""Stranding, cost, and payoff metrics.

Unused capacity at a node is U = C_provisioned - L. The stranded share
of U is the part no admissible arrival could still consume: a node is
probed with the smallest deployable SKU of each class, and if none fits
while drawing on that node, its unused capacity is counted stranded.
Capacity figures use redundancy-effective (usable) ratings, so block
reserves and distributed derating are excluded from the base.

Cost is a per-component model: each component prices per MW against
either high-availability IT capacity or provisioned line-up capacity
(which includes block reserves); static transfer switches only exist in
block designs, which is what separates the two families' base $/MW.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .arrivals import Deployment
from .hardware import HardwareClass
from .hierarchy import HallDesign, RedundancyKind
from .placement import FleetState, check_feasible
from .resources import RESOURCES


@dataclass(frozen=True)
class NodeStranding:
    node_id: str
    provisioned: float
    load: float
    stranded: float

    @property
    def unused(self) -> float:
        return self.provisioned - self.load

    @property
    def stranded_fraction(self) -> float:
        return self.stranded / self.provisioned if self.provisioned > 0 else 0.0


@dataclass
class HallStranding:
    hall_index: int
    lineups: list[NodeStranding]
    rows: dict[str, list[NodeStranding]]  # resource -> per-row stats
    hall: NodeStranding
    per_class_stranded_kw: dict[str, float]

    def lineup_stranded_fraction(self) -> float:
        prov = sum(n.provisioned for n in self.lineups)
        return sum(n.stranded for n in self.lineups) / prov if prov > 0 else 0.0


@dataclass
class StrandingReport:
    """Per-level stranding breakdown for one fleet snapshot."""

    halls: list[HallStranding]
    site: NodeStranding

    def hall_stranded_fractions(self) -> list[float]:
        return [h.lineup_stranded_fraction() for h in self.halls]

    def site_stranded_fraction(self) -> float:
        return self.site.stranded_fraction

    def lineup_fractions(self) -> list[float]:
        return [
            n.stranded_fraction for h in self.halls for n in h.lineups if n.provisioned > 0
        ]


def stranded_capacity(
    state: FleetState,
    probes: Sequence[Deployment],
    class_weights: Optional[dict[str, float]] = None,
) -> StrandingReport:
    """Probe-based stranding at row, line-up, hall, and site level.

    Each probe stands for the smallest deployment of its class that
    could still arrive (a whole pod or rack quantum, not a bare rack).
    A node's unused capacity is stranded for a class when that class's
    probe cannot be placed consuming it; the headline stranded figure
    weights the per-class result by the demand mix (equal weights when
    none are given), so capacity only usable by classes that barely
    arrive counts as mostly stranded.
    """
    if not probes:
        raise ValueError("at least one probe deployment is required")
    classes = [p.klass.value for p in probes]
    if class_weights is None:
        weights = {c: 1.0 / len(classes) for c in classes}
    else:
        total = sum(class_weights.get(c, 0.0) for c in classes)
        if total <= 0:
            raise ValueError("class weights must cover the probe classes")
        weights = {c: class_weights.get(c, 0.0) / total for c in classes}

    halls: list[HallStranding] = []
    site_prov = site_load = site_stranded = 0.0
    for hall_state in state.halls:
        row_fits: dict[str, dict[str, bool]] = {}
        for row in hall_state.hall.rows:
            fits = {}
            for probe in probes:
                placement, _ = check_feasible(hall_state, row, probe)
                fits[probe.klass.value] = placement is not None
            row_fits[row.id] = fits

        rows_stats: dict[str, list[NodeStranding]] = {m: [] for m in RESOURCES}
        for row in hall_state.hall.rows:
            weight_stranded = sum(
                weights[c] for c in classes if not row_fits[row.id][c]
            )
            used = {
                "power_kw": hall_state.row_power[row.id],
                "air_cfm": hall_state.row_air[row.id],
                "liquid_lpm": hall_state.row_liquid[row.id],
                "tiles": hall_state.row_tiles[row.id],
            }
            for resource in RESOURCES:
                cap = getattr(row.rating, resource)
                if cap == float("inf"):
                    continue
                load = used[resource]
                rows_stats[resource].append(
                    NodeStranding(row.id, cap, load, (cap - load) * weight_stranded)
                )

        lineup_stats = []
        per_class: dict[str, float] = {c: 0.0 for c in classes}
        for lineup in hall_state.hall.lineups:
            prov = hall_state.eff_ha[lineup.id]
            if prov <= 0:
                continue  # block reserves carry no usable IT capacity
            load = hall_state.lineup_load[lineup.id]
            consuming_rows = [
                r for r in hall_state.hall.rows if lineup.id in r.load_parents
            ]
            unused = prov - load
            stranded = 0.0
            for probe in probes:
                c = probe.klass.value
                if not any(row_fits[r.id][c] for r in consuming_rows):
                    per_class[c] += unused
                    stranded += weights[c] * unused
            lineup_stats.append(NodeStranding(lineup.id, prov, load, stranded))

        hall_prov = hall_state.hall.ha_capacity_kw
        hall_load = hall_state.total_load_kw
        hall_stranded = sum(n.stranded for n in lineup_stats)
        halls.append(
            HallStranding(
                hall_index=hall_state.index,
                lineups=lineup_stats,
                rows=rows_stats,
                hall=NodeStranding(f"hall-{hall_state.index}", hall_prov, hall_load, hall_stranded),
                per_class_stranded_kw=per_class,
            )
        )
        site_prov += hall_prov
        site_load += hall_load
        site_stranded += hall_stranded

    return StrandingReport(
        halls=halls, site=NodeStranding("site", site_prov, site_load, site_stranded)
    )


def smallest_probes(
    year: int,
    scenario,
    gpu_arch,
    pod_racks: int = 1,
    nongpu_quantum: int = 1,
    sku_clusters=None,
    nongpu_scenario=None,
) -> list[Deployment]:
    """Smallest deployment per class that could still arrive.

    Probes mirror the run's arrival units: the GPU probe is a whole pod
    of the configured size, and compute/storage probes are one quantum
    of the lowest-power SKU cluster placed in a single row.
    """
    from .hardware import (
        DEFAULT_SKU_CLUSTERS,
        Scenario,
        cooling_demand,
        gpu_rack_power,
        nongpu_power_trajectory,
        pod_power,
    )
    from .hierarchy import Tier

    clusters = sku_clusters or DEFAULT_SKU_CLUSTERS
    nongpu_scenario = nongpu_scenario or Scenario.MED
    alpha_min = min(c.alpha for c in clusters)
    probes = []
    for klass in (HardwareClass.GPU, HardwareClass.COMPUTE, HardwareClass.STORAGE):
        if klass is HardwareClass.GPU:
            if gpu_arch is None:
                continue
            rack = gpu_rack_power(gpu_arch, max(year, gpu_arch.available_from), scenario)
            power = pod_power([rack] * pod_racks)
            racks, feeds, sku = pod_racks, 4, rack
        else:
            sku = alpha_min * nongpu_power_trajectory(klass, year, nongpu_scenario)
            power = sku * nongpu_quantum
            racks, feeds = nongpu_quantum, 2
        probes.append(
            Deployment(
                id=f"probe-{klass.value}",
                klass=klass,
                sku_power_kw=sku,
                demand=cooling_demand(klass, power, racks=racks),
                tier=Tier.HA,
                feeds=feeds,
                quantum=racks,
                pod_racks=pod_racks if klass is HardwareClass.GPU else 1,
                arrival_month=0,
                lifetime_months=60,
                harvest_month=None,
                harvest_fraction=0.0,
            )
        )
    return probes


# -- component cost model ---------------------------------------------------


class CostBasis(Enum):
    HA_MW = "ha_mw"  # scales with usable high-availability IT capacity
    LINEUP_MW = "lineup_mw"  # scales with provisioned line-up capacity incl. reserves


@dataclass(frozen=True)
class ComponentCost:
    name: str
    usd_per_mw: float
    basis: CostBasis = CostBasis.HA_MW
    block_only: bool = False

    def __post_init__(self) -> None:
        if self.usd_per_mw < 0:
            raise ValueError("component costs must be >= 0")


DEFAULT_COST_MODEL: tuple[ComponentCost, ...] = (
    ComponentCost("ups_systems", 1_000_000, CostBasis.LINEUP_MW),
    ComponentCost("battery_systems", 275_000),
    ComponentCost("backup_generators", 750_000),
    ComponentCost("mv_transformers", 120_000),
    ComponentCost("mv_switchgear", 60_000),
    ComponentCost("lv_switchboards", 150_000),
    ComponentCost("automatic_transfer_switches", 70_000),
    ComponentCost("static_transfer_switches", 250_000, CostBasis.LINEUP_MW, block_only=True),
    ComponentCost("row_distribution", 100_000),
    ComponentCost("busbar_overhead", 6_000),
    ComponentCost("cooling_systems", 3_000_000),
    ComponentCost("shell_site_engineering", 1_800_000),
    ComponentCost("fit_out_other", 2_800_000),
)


def flat_cost_per_mw(model: Iterable[ComponentCost] = DEFAULT_COST_MODEL) -> float:
    """Sum of all component rates at equal scaling bases."""
    return sum(c.usd_per_mw for c in model)


def hall_capex(
    design: HallDesign, model: Iterable[ComponentCost] = DEFAULT_COST_MODEL
) -> float:
    """Dollars to build one hall of the given design."""
    ha_mw = design.ha_capacity_kw / 1000.0
    lineup_mw = design.provisioned_lineup_kw / 1000.0
    block = design.redundancy.kind is RedundancyKind.BLOCK
    total = 0.0
    for component in model:
        if component.block_only and not block:
            continue
        basis_mw = lineup_mw if component.basis is CostBasis.LINEUP_MW else ha_mw
        total += component.usd_per_mw * basis_mw
    return total


def initial_cost_per_mw(
    design: HallDesign, model: Iterable[ComponentCost] = DEFAULT_COST_MODEL
) -> float:
    return hall_capex(design, model) / (design.ha_capacity_kw / 1000.0)


def effective_cost(halls: Sequence[tuple[float, float]]) -> float:
    """Infrastructure dollars per MW of finally deployed IT.

    Takes (capex_usd, deployed_mw) per hall; the denominator is the
    fleet's total deployed MW at horizon end.
    """
    deployed = sum(p for _, p in halls)
    if deployed <= 0:
        raise ValueError("effective cost undefined with zero deployed MW")
    return sum(k for k, _ in halls) / deployed


def pod_payoff(delta_tps_per_w: float, delta_cost: float) -> float:
    """Relative gain of a pod over the single-rack baseline."""
    if delta_cost <= -1:
        raise ValueError("delta_cost must be > -1")
    return (1 + delta_tps_per_w) / (1 + delta_cost) - 1
