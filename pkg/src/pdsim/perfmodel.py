"""Comparative MoE inference throughput model.

Per phase (prefill / decode), throughput is the slowest of compute, HBM
bandwidth, and communication:

    TPS = min(F_D / C, B_HBM / M, 1 / T_comm)

with per-token compute C and memory M costs from the model shape, and
T_comm the tensor-parallel plus expert-parallel transfer time. Shared
attention runs tensor-parallel inside one NVLink domain; expert layers
run expert-parallel across domains. A model that does not fit the
usable HBM of one deployment unit spans N_dom units, and the fraction
of expert traffic leaving a unit, f_IB = 1 - 1/N_dom, rides the
scale-out fabric. Larger pods grow both the unit's HBM pool (fewer
domains, lower f_IB) and its aggregate scale-out bandwidth, which is
how pod-local placement buys throughput for models too large for a
single rack.

Conventions: 1 FMA = 2 FLOPs; FP8 weights (1 B), FP4 activations and KV
cache (0.5 B); serving batch 256; top-2 routing with FF = 4w.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .hardware import (
    HBM_USABLE_FRACTION,
    DeploymentArch,
    Scenario,
    gpu_rack_power,
    pod_power,
)


@dataclass(frozen=True)
class ModelConfig:
    """MoE model shape and serving operating point."""

    name: str
    layers: int
    width: int
    experts: int
    top_k: int = 2
    ff_mult: int = 4
    s_prompt: int = 1024
    s_out: int = 1024
    batch: int = 256
    b_weight: float = 1.0  # bytes per weight
    b_act: float = 0.5  # bytes per activation
    b_kv: float = 0.5  # bytes per KV element

    @property
    def ff(self) -> int:
        return self.ff_mult * self.width

    @property
    def w_total_bytes(self) -> float:
        """All expert plus shared attention weights."""
        per_layer = 4 * self.width**2 + 2 * self.experts * self.width * self.ff
        return self.layers * per_layer * self.b_weight

    @property
    def w_active_bytes(self) -> float:
        """Shared attention plus the K routed experts one token touches."""
        per_layer = 4 * self.width**2 + 2 * self.top_k * self.width * self.ff
        return self.layers * per_layer * self.b_weight


MODEL_SUITE = (
    ModelConfig("moe-0.6t", layers=48, width=6144, experts=64),
    ModelConfig("moe-5t", layers=96, width=8192, experts=96),
    ModelConfig("moe-19t", layers=120, width=12288, experts=128),
    ModelConfig("moe-51t", layers=120, width=14336, experts=256),
    ModelConfig("moe-132t", layers=120, width=16384, experts=512),
    ModelConfig("moe-401t", layers=144, width=18432, experts=1024),
)


@dataclass(frozen=True)
class DeploymentPerf:
    """Resolved hardware view of one model-serving deployment.

    A deployment unit is a pod of `pod_racks` racks; the model instance
    spans `n_dom` units so that its weights fit in usable HBM.
    """

    arch_name: str
    pod_racks: int
    n_dom: int
    f_d_flops: float  # aggregate FLOP/s over the instance
    b_hbm: float  # aggregate HBM bytes/s
    b_nvl: float  # aggregate bytes/s per NVLink domain
    b_ib: float  # aggregate scale-out bytes/s per deployment unit
    b_transfer: float  # KV transfer bandwidth (defaults to b_ib)
    h_usable_bytes: float
    t_d: int  # tensor-parallel degree = packages per NVLink domain
    p_deploy_kw: float

    def __post_init__(self) -> None:
        for name in ("f_d_flops", "b_hbm", "b_nvl", "b_ib", "b_transfer", "h_usable_bytes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def n_domains(w_total_bytes: float, unit_pkgs: int, hbm_pkg_gb: float) -> int:
    """Deployment units needed to hold the model in usable HBM."""
    if hbm_pkg_gb <= 0:
        raise ValueError("HBM capacity must be positive")
    usable = HBM_USABLE_FRACTION * unit_pkgs * hbm_pkg_gb * 1e9
    return max(1, math.ceil(w_total_bytes / usable))


def ib_fraction(n_dom: int) -> float:
    """Share of expert-parallel traffic leaving the local domain."""
    if n_dom < 1:
        raise ValueError("n_dom must be >= 1")
    return 0.0 if n_dom == 1 else 1.0 - 1.0 / n_dom


def build_deployment(
    model: ModelConfig,
    arch: DeploymentArch,
    year: int,
    scenario: Scenario = Scenario.MED,
    pod_racks: int = 1,
    b_transfer: Optional[float] = None,
) -> DeploymentPerf:
    pkg = arch.perf.at(year)
    unit_pkgs = pod_racks * arch.n_pkg
    dom = n_domains(model.w_total_bytes, unit_pkgs, pkg.hbm_gb)
    instance_pkgs = dom * unit_pkgs
    rack_kw = gpu_rack_power(arch, max(year, arch.available_from), scenario)
    unit_power = pod_power([rack_kw] * pod_racks)
    b_ib = pod_racks * arch.b_ib_tbps * 1e12
    return DeploymentPerf(
        arch_name=arch.name,
        pod_racks=pod_racks,
        n_dom=dom,
        f_d_flops=instance_pkgs * pkg.flops_pflops * 1e15,
        b_hbm=instance_pkgs * pkg.hbm_bw_tbps * 1e12,
        b_nvl=arch.b_nvl_tbps * 1e12,
        b_ib=b_ib,
        b_transfer=b_transfer if b_transfer is not None else b_ib,
        h_usable_bytes=HBM_USABLE_FRACTION * instance_pkgs * pkg.hbm_gb * 1e9,
        t_d=arch.nvl_domain_pkgs,
        p_deploy_kw=dom * unit_power,
    )


def phase_costs(
    m: ModelConfig, phase: str, t: int, tp_degree: int
) -> tuple[float, float, float, float]:
    """(compute FLOPs/token, memory bytes/token, TP bytes/token, EP bytes/token)."""
    L, w = m.layers, m.width
    if phase == "prefill":
        compute = L * (4 * m.top_k * w * m.ff + 4 * w**2 + 2 * w * m.s_prompt)
        memory = m.w_total_bytes / (m.batch * m.s_prompt) + 2 * L * w * m.b_kv
    elif phase == "decode":
        if t < m.s_prompt:
            raise ValueError("decode context must be >= prompt length")
        compute = L * (4 * m.top_k * w * m.ff + 4 * w**2 + 2 * w * t)
        memory = m.w_active_bytes / m.batch + 2 * L * w * (t + 1) * m.b_kv
    else:
        raise ValueError(f"unknown phase {phase!r}")
    n_tp = L * 2 * (tp_degree - 1) / tp_degree * w * m.b_act
    n_ep = 2 * L * m.top_k * w * m.b_act
    return compute, memory, n_tp, n_ep


def comm_time(m: ModelConfig, d: DeploymentPerf, phase: str, t: int = 0) -> float:
    """Seconds per token step: TP on NVLink plus EP split local/remote."""
    _, _, n_tp, n_ep = phase_costs(m, phase, max(t, m.s_prompt), d.t_d)
    f_ib = ib_fraction(d.n_dom)
    t_tp = n_tp / d.b_nvl
    t_ep = max((1 - f_ib) * n_ep / d.b_nvl, f_ib * n_ep / d.b_ib)
    return t_tp + t_ep


def phase_tps(m: ModelConfig, d: DeploymentPerf, phase: str, t: int = 0) -> float:
    """Tokens/s for one phase: slowest of compute, memory, communication."""
    compute, memory, _, _ = phase_costs(m, phase, max(t, m.s_prompt), d.t_d)
    t_comm = comm_time(m, d, phase, t)
    return min(d.f_d_flops / compute, d.b_hbm / memory, 1.0 / t_comm)


def kv_transfer_time(m: ModelConfig, d: DeploymentPerf) -> float:
    """One-time prompt KV handoff for disaggregated serving."""
    return 2 * m.layers * m.width * m.s_prompt * m.b_kv / d.b_transfer


def request_tps(m: ModelConfig, d: DeploymentPerf) -> float:
    """Request-level tokens/s: prefill + per-step decode + KV transfer.

    Each decode step advances the whole batch by one token, so it takes
    batch/TPS_dec(t) seconds at context length t.
    """
    if m.s_out < 1:
        raise ValueError("s_out must be >= 1")
    pre_time = m.batch * m.s_prompt / phase_tps(m, d, "prefill")

    ts = np.arange(m.s_prompt + 1, m.s_prompt + m.s_out + 1, dtype=np.float64)
    compute = m.layers * (
        4 * m.top_k * m.width * m.ff + 4 * m.width**2 + 2 * m.width * ts
    )
    memory = m.w_active_bytes / m.batch + 2 * m.layers * m.width * (ts + 1) * m.b_kv
    t_comm = comm_time(m, d, "decode", int(ts[0]))  # context-independent
    dec_rates = np.minimum(
        np.minimum(d.f_d_flops / compute, d.b_hbm / memory), 1.0 / t_comm
    )
    dec_time = m.batch * float(np.sum(1.0 / dec_rates))

    total = pre_time + dec_time + kv_transfer_time(m, d)
    return m.batch * m.s_out / total


def tps_per_watt(m: ModelConfig, d: DeploymentPerf) -> float:
    """Request tokens per second per kW of deployment power."""
    return request_tps(m, d) / d.p_deploy_kw
