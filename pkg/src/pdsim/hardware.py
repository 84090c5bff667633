"""Rack and pod resource projections, 2024-2035.

Package-level trends set compute, HBM bandwidth, HBM capacity, and TDP;
the deployment architecture sets package count, NVLink-domain size,
aggregate bandwidths, and non-package overhead power. Rack power is

    P_rack(year, s) = N_pkg * P_pkg(year, s) + P_ovhd

with the per-package TDP held at its anchor through the hold year and
compounded at the scenario growth rate afterwards. For the Oberon case
the built-in per-year table takes precedence over the compounding rule
(the published per-year figures do not follow a single anchor+rate
trajectory), so lookups reproduce the reference table exactly; years
beyond the table extrapolate from its last entry.

Performance projections hold at their anchor through 2028 and then grow
at fixed annual rates: +30%/yr FP4 compute, +15%/yr HBM bandwidth,
+25%/yr HBM capacity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .hierarchy import AIR_CFM_PER_KW
from .resources import ResourceVector


class Scenario(Enum):
    LOW = "low"
    MED = "med"
    HIGH = "high"


class HardwareClass(Enum):
    GPU = "gpu"
    COMPUTE = "compute"
    STORAGE = "storage"


GPU_TDP_GROWTH = {Scenario.LOW: 0.05, Scenario.MED: 0.125, Scenario.HIGH: 0.20}

# Fraction of a GPU rack's power dissipated to air by networking gear;
# the accelerator remainder is direct-to-chip liquid cooled.
GPU_AIR_FRACTION_DEFAULT = 0.15
LIQUID_LPM_PER_GPU_RACK = 2.0

PERF_GROWTH_FLOPS = 0.30  # per year after the hold year
PERF_GROWTH_HBM_BW = 0.15
PERF_GROWTH_HBM_CAP = 0.25
PERF_HOLD_YEAR = 2028


@dataclass(frozen=True)
class PackagePerf:
    flops_pflops: float  # FP4 PFLOP/s per package
    hbm_bw_tbps: float  # TB/s per package
    hbm_gb: float  # GB per package


@dataclass(frozen=True)
class PackageProjection:
    """Per-package performance: per-year anchors, then compound growth."""

    anchors: dict[int, PackagePerf]  # year -> anchored values
    hold_until: int = PERF_HOLD_YEAR

    def at(self, year: int) -> PackagePerf:
        anchor_years = sorted(self.anchors)
        first = anchor_years[0]
        if year < first:
            raise ValueError(f"no package projection before {first}")
        base_year = max(y for y in anchor_years if y <= year)
        base = self.anchors[base_year]
        exponent = max(0, year - max(self.hold_until, base_year))
        return PackagePerf(
            base.flops_pflops * (1 + PERF_GROWTH_FLOPS) ** exponent,
            base.hbm_bw_tbps * (1 + PERF_GROWTH_HBM_BW) ** exponent,
            base.hbm_gb * (1 + PERF_GROWTH_HBM_CAP) ** exponent,
        )


@dataclass(frozen=True)
class DeploymentArch:
    """Accelerator deployment-unit architecture (one rack)."""

    name: str
    available_from: int
    n_pkg: int
    dies_per_pkg: int
    nvl_domain_pkgs: int
    b_nvl_tbps: float  # aggregate unidirectional per NVLink domain
    b_ib_tbps: float  # aggregate scale-out per deployment unit (rack)
    p_ovhd_kw: float
    pkg_tdp_anchor_kw: dict[Scenario, float]  # kW per package at anchor_year
    anchor_year: int
    hold_until: int
    perf: PackageProjection
    rack_power_table: dict[int, dict[Scenario, float]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.nvl_domain_pkgs > self.n_pkg:
            raise ValueError("nvl_domain_pkgs cannot exceed n_pkg")
        if self.b_nvl_tbps <= 0 or self.b_ib_tbps <= 0:
            raise ValueError("bandwidths must be positive")


def gpu_rack_power(arch: DeploymentArch, year: int, scenario: Scenario) -> float:
    """Rack power in kW: N_pkg * P_pkg(year, s) + P_ovhd."""
    if year < arch.available_from:
        raise ValueError(f"{arch.name} is not available before {arch.available_from}")
    if arch.rack_power_table:
        table_years = sorted(arch.rack_power_table)
        if year in arch.rack_power_table:
            return arch.rack_power_table[year][scenario]
        last = table_years[-1]
        if year > last:
            growth = GPU_TDP_GROWTH[scenario]
            base = arch.rack_power_table[last][scenario] - arch.p_ovhd_kw
            return base * (1 + growth) ** (year - last) + arch.p_ovhd_kw
    growth = GPU_TDP_GROWTH[scenario]
    exponent = max(0, year - arch.hold_until)
    pkg = arch.pkg_tdp_anchor_kw[scenario] * (1 + growth) ** exponent
    return arch.n_pkg * pkg + arch.p_ovhd_kw


def pod_power(rack_powers_kw: Sequence[float]) -> float:
    """Pod power is the sum of the constituent racks."""
    if not rack_powers_kw:
        raise ValueError("pod must contain at least one rack")
    return float(sum(rack_powers_kw))


def nongpu_power_trajectory(klass: HardwareClass, year: int, scenario: Scenario) -> float:
    """Max rack power (kW) for compute/storage classes.

    Compute anchors at 20 kW in 2025 and grows {3, 5, 8}%/yr; storage
    anchors at 15 kW and grows {2, 4, 6}%/yr.
    """
    if klass is HardwareClass.COMPUTE:
        anchor, rates = 20.0, {Scenario.LOW: 0.03, Scenario.MED: 0.05, Scenario.HIGH: 0.08}
    elif klass is HardwareClass.STORAGE:
        anchor, rates = 15.0, {Scenario.LOW: 0.02, Scenario.MED: 0.04, Scenario.HIGH: 0.06}
    else:
        raise ValueError("GPU rack power comes from gpu_rack_power")
    return anchor * (1 + rates[scenario]) ** (year - 2025)


@dataclass(frozen=True)
class SkuCluster:
    """One representative SKU group inside a hardware class."""

    alpha: float  # scaling factor on the class max power, in (0, 1]
    probability: float

    def __post_init__(self) -> None:
        if not (0 < self.alpha <= 1):
            raise ValueError("alpha must be in (0, 1]")
        if not (0 <= self.probability <= 1):
            raise ValueError("probability must be in [0, 1]")


# Four-cluster default preserving substantial intra-class spread; the
# empirical cluster weights are not public, so these are configurable.
DEFAULT_SKU_CLUSTERS = (
    SkuCluster(1.00, 0.4),
    SkuCluster(0.75, 0.3),
    SkuCluster(0.50, 0.2),
    SkuCluster(0.25, 0.1),
)


def sku_power(cluster: SkuCluster, p_max_kw: float) -> float:
    if p_max_kw <= 0:
        raise ValueError("p_max must be positive")
    return cluster.alpha * p_max_kw


def cooling_demand(
    klass: HardwareClass,
    power_kw: float,
    racks: int = 1,
    gpu_air_fraction: float = GPU_AIR_FRACTION_DEFAULT,
) -> ResourceVector:
    """Demand vector for a deployment of `racks` racks totalling power_kw.

    Air is 165 CFM per air-cooled kW. GPU racks split power between
    liquid-cooled accelerators and air-cooled networking and draw a
    fixed 2 LPM of direct-to-chip liquid per rack.
    """
    if power_kw < 0:
        raise ValueError("power must be >= 0")
    if klass is HardwareClass.GPU:
        air = power_kw * gpu_air_fraction * AIR_CFM_PER_KW
        liquid = LIQUID_LPM_PER_GPU_RACK * racks
    else:
        air = power_kw * AIR_CFM_PER_KW
        liquid = 0.0
    return ResourceVector(power_kw, air, liquid, racks)


def _table(rows: dict[int, tuple[float, float, float]]) -> dict[int, dict[Scenario, float]]:
    return {
        year: {Scenario.LOW: low, Scenario.MED: med, Scenario.HIGH: high}
        for year, (low, med, high) in rows.items()
    }


# Reference per-year rack power (kW) for the Oberon form factor; anchors
# at B200 in 2025 and re-anchors at Vera Rubin in 2026.
OBERON_RACK_POWER = _table(
    {
        2025: (157, 180, 203),
        2026: (160, 178, 196),
        2027: (166, 197, 226),
        2028: (173, 218, 262),
        2029: (180, 243, 341),
        2030: (188, 271, 434),
        2031: (197, 303, 545),
        2032: (205, 339, 677),
        2033: (214, 379, 836),
        2034: (224, 425, 1025),
    }
)

OBERON_PERF = PackageProjection(
    anchors={
        2025: PackagePerf(10.0, 8.0, 192.0),  # B200
        2026: PackagePerf(50.0, 22.0, 288.0),  # Vera Rubin
    }
)

KYBER_PERF = PackageProjection(anchors={2027: PackagePerf(100.0, 32.0, 1024.0)})

H200_PERF = PackageProjection(anchors={2024: PackagePerf(4.0, 4.8, 141.0)})

DGX_H200 = DeploymentArch(
    name="dgx-h200",
    available_from=2024,
    n_pkg=8,
    dies_per_pkg=1,
    nvl_domain_pkgs=8,
    b_nvl_tbps=3.6,
    b_ib_tbps=0.4,
    p_ovhd_kw=3.0,
    pkg_tdp_anchor_kw={Scenario.LOW: 0.7, Scenario.MED: 0.7, Scenario.HIGH: 0.7},
    anchor_year=2024,
    hold_until=2024,
    perf=H200_PERF,
)

BLACKWELL_OBERON = DeploymentArch(
    name="blackwell-oberon",
    available_from=2025,
    n_pkg=72,
    dies_per_pkg=1,
    nvl_domain_pkgs=72,
    b_nvl_tbps=64.8,
    b_ib_tbps=7.2,
    p_ovhd_kw=25.0,
    pkg_tdp_anchor_kw={s: (OBERON_RACK_POWER[2025][s] - 25.0) / 72 for s in Scenario},
    anchor_year=2025,
    hold_until=2025,
    perf=PackageProjection(anchors={2025: PackagePerf(10.0, 8.0, 192.0)}),
    rack_power_table={2025: OBERON_RACK_POWER[2025]},
)

VERA_RUBIN_NVL72 = DeploymentArch(
    name="vera-rubin-nvl72",
    available_from=2025,
    n_pkg=72,
    dies_per_pkg=2,
    nvl_domain_pkgs=72,
    b_nvl_tbps=259.2,
    b_ib_tbps=14.4,
    p_ovhd_kw=30.0,
    pkg_tdp_anchor_kw={s: (OBERON_RACK_POWER[2026][s] - 30.0) / 72 for s in Scenario},
    anchor_year=2026,
    hold_until=2026,
    perf=OBERON_PERF,
    rack_power_table=OBERON_RACK_POWER,
)

KYBER_RUBIN_ULTRA = DeploymentArch(
    name="kyber-rubin-ultra",
    available_from=2027,
    n_pkg=144,
    dies_per_pkg=4,
    nvl_domain_pkgs=144,
    b_nvl_tbps=750.0,
    b_ib_tbps=57.6,
    p_ovhd_kw=35.0,
    pkg_tdp_anchor_kw={
        Scenario.LOW: 480.0 / 144,
        Scenario.MED: 565.0 / 144,
        Scenario.HIGH: 650.0 / 144,
    },
    anchor_year=2027,
    hold_until=2028,
    perf=KYBER_PERF,
)

ARCHS = {
    a.name: a for a in (DGX_H200, BLACKWELL_OBERON, VERA_RUBIN_NVL72, KYBER_RUBIN_ULTRA)
}

HBM_USABLE_FRACTION = 0.7  # remainder reserved for KV residency and runtime


def derived_deployment(arch: DeploymentArch, year: int, packages: Optional[int] = None):
    """(F_D FLOP/s, B_HBM B/s, usable HBM bytes) for `packages` packages."""
    n = arch.n_pkg if packages is None else packages
    pkg = arch.perf.at(year)
    return (
        n * pkg.flops_pflops * 1e15,
        n * pkg.hbm_bw_tbps * 1e12,
        HBM_USABLE_FRACTION * n * pkg.hbm_gb * 1e9,
    )
