import math
from dataclasses import replace

import numpy as np
import pytest

from pdsim.arrivals import (
    HARVEST_FRACTION,
    LIFETIME_PARAMS,
    ArrivalEnvelope,
    Deployment,
    Trace,
    TraceConfig,
    generate_trace,
    harvest_schedule,
    sample_lifetime,
)
from pdsim.hardware import (
    VERA_RUBIN_NVL72,
    HardwareClass,
    Scenario,
    SkuCluster,
    cooling_demand,
)
from pdsim.hierarchy import Tier


def flat_envelope(klass=HardwareClass.COMPUTE, mw=12.0):
    return ArrivalEnvelope(klass, initial_mw_per_year=mw, growth=0.0, cap_mw_per_year=max(mw, 1e-9))


def simple_config(**overrides) -> TraceConfig:
    base = dict(
        envelopes=(flat_envelope(),),
        horizon_months=12,
        scenario=Scenario.MED,
        start_year=2025,
        gpu_arch=VERA_RUBIN_NVL72,
        pod_racks=1,
        nongpu_quantum=1,
        sku_clusters=(SkuCluster(1.0, 1.0),),
        harvest=True,
        nongpu_scenario=Scenario.MED,
    )
    base.update(overrides)
    return TraceConfig(**base)


class TestEnvelope:
    def test_seasonality_must_sum_to_one(self):
        with pytest.raises(ValueError):
            ArrivalEnvelope(HardwareClass.GPU, 10, 0.1, 20, seasonality=tuple([0.1] * 12))

    def test_cap_limits_growth(self):
        env = ArrivalEnvelope(HardwareClass.GPU, 10, 1.0, 15)
        assert env.annual_target_mw(0) == 10
        assert env.annual_target_mw(5) == 15


class TestGenerateTrace:
    def test_flat_year_of_20kw_racks(self):
        # 12 MW/yr uniform = 1 MW/month = exactly 50 racks of 20 kW.
        trace = generate_trace(simple_config(), seed=1)
        deploys = trace.deployments()
        assert len(deploys) == 600
        by_month = trace.deployed_kw_by_month()
        for month in range(12):
            assert by_month[month][HardwareClass.COMPUTE] == pytest.approx(1000.0)

    def test_zero_level_gives_empty_trace(self):
        cfg = simple_config(envelopes=(flat_envelope(mw=0.0),))
        assert generate_trace(cfg, seed=1).deployments() == []

    def test_budget_adherence_within_one_deployment(self):
        cfg = simple_config(
            sku_clusters=(SkuCluster(1.0, 0.5), SkuCluster(0.4, 0.5)),
            nongpu_quantum=3,
        )
        trace = generate_trace(cfg, seed=7)
        max_single = max(d.demand.power_kw for d in trace.deployments())
        cumulative = 0.0
        by_month = trace.deployed_kw_by_month()
        for month in range(cfg.horizon_months):
            cumulative += by_month.get(month, {}).get(HardwareClass.COMPUTE, 0.0)
            budget = 1000.0 * (month + 1)
            assert abs(cumulative - budget) <= max_single + 1e-6

    def test_determinism_and_seed_sensitivity(self):
        cfg = simple_config(sku_clusters=(SkuCluster(1.0, 0.6), SkuCluster(0.5, 0.4)))
        a = generate_trace(cfg, seed=42)
        b = generate_trace(cfg, seed=42)
        c = generate_trace(cfg, seed=43)
        assert a.to_jsonl() == b.to_jsonl()
        assert a.digest() != c.digest()

    def test_gpu_pods_are_ha_with_four_feeds(self):
        cfg = simple_config(
            envelopes=(flat_envelope(HardwareClass.GPU, 24.0),),
            pod_racks=3,
            start_year=2026,
        )
        for d in generate_trace(cfg, seed=3).deployments():
            assert d.tier is Tier.HA
            assert d.feeds == 4
            assert d.pod_racks == 3
            assert d.demand.tiles == 3

    def test_events_time_ordered_with_lifecycle(self):
        cfg = simple_config(horizon_months=36)
        trace = generate_trace(cfg, seed=5)
        keys = [(e.month, e.ORDER[e.kind]) for e in trace.events]
        assert keys == sorted(keys)
        kinds = {e.kind for e in trace.events}
        assert "harvest" in kinds  # month 12+ events present

    def test_empty_envelopes_rejected(self):
        with pytest.raises(ValueError):
            generate_trace(simple_config(envelopes=()), seed=1)

    def test_sku_sampling_matches_cluster_probabilities(self):
        clusters = (
            SkuCluster(1.0, 0.4),
            SkuCluster(0.75, 0.3),
            SkuCluster(0.5, 0.2),
            SkuCluster(0.25, 0.1),
        )
        cfg = simple_config(
            envelopes=(flat_envelope(mw=400.0),),
            sku_clusters=clusters,
            horizon_months=12,
        )
        deploys = generate_trace(cfg, seed=11).deployments()
        assert len(deploys) >= 10_000
        counts = {c.alpha: 0 for c in clusters}
        for d in deploys:
            counts[round(d.sku_power_kw / 20.0, 2)] += 1
        n = sum(counts.values())
        chi2 = sum(
            (counts[c.alpha] - n * c.probability) ** 2 / (n * c.probability)
            for c in clusters
        )
        # df=3, alpha=0.001 critical value
        assert chi2 < 16.27


class TestLifetimes:
    def test_degenerate_sigma_hits_mean(self, monkeypatch):
        monkeypatch.setitem(LIFETIME_PARAMS, HardwareClass.GPU, (60.0, 0.0))
        monkeypatch.setitem(LIFETIME_PARAMS, HardwareClass.STORAGE, (84.0, 0.0))
        rng = np.random.Generator(np.random.PCG64(0))
        assert sample_lifetime(HardwareClass.GPU, rng) == 60
        assert sample_lifetime(HardwareClass.STORAGE, rng) == 84

    def test_empirical_mean_gpu(self):
        rng = np.random.Generator(np.random.PCG64(123))
        draws = [sample_lifetime(HardwareClass.GPU, rng) for _ in range(100_000)]
        assert abs(np.mean(draws) - 60.0) < 1.0

    def test_truncated_at_one_year(self):
        rng = np.random.Generator(np.random.PCG64(5))
        lo = min(sample_lifetime(HardwareClass.GPU, rng) for _ in range(50_000))
        assert lo >= 12


class TestHarvest:
    def _deployment(self, klass, power):
        return Deployment(
            id="d0",
            klass=klass,
            sku_power_kw=power,
            demand=cooling_demand(klass, power),
            tier=Tier.HA,
            feeds=4 if klass is HardwareClass.GPU else 2,
            quantum=1,
            pod_racks=1,
            arrival_month=4,
            lifetime_months=60,
            harvest_month=16,
            harvest_fraction=HARVEST_FRACTION[klass],
        )

    def test_compute_releases_15_percent_after_a_year(self):
        d = self._deployment(HardwareClass.COMPUTE, 20.0)
        month, released = harvest_schedule(d, enabled=True)
        assert month == 16
        assert released.power_kw == pytest.approx(3.0)
        assert released.air_cfm == pytest.approx(0.15 * d.demand.air_cfm)
        assert released.tiles == 0

    def test_gpu_releases_10_percent(self):
        d = self._deployment(HardwareClass.GPU, 600.0)
        _, released = harvest_schedule(d, enabled=True)
        assert released.power_kw == pytest.approx(60.0)

    def test_disabled_returns_none(self):
        d = self._deployment(HardwareClass.COMPUTE, 20.0)
        assert harvest_schedule(d, enabled=False) is None

    def test_fraction_cap_enforced(self):
        with pytest.raises(ValueError):
            replace(self._deployment(HardwareClass.GPU, 600.0), harvest_fraction=0.2)


class TestTraceSerialization:
    def test_roundtrip(self):
        cfg = simple_config(horizon_months=24)
        trace = generate_trace(cfg, seed=9)
        parsed = Trace.from_jsonl(trace.to_jsonl())
        assert parsed.to_jsonl() == trace.to_jsonl()

    def test_truncated_line_reports_position(self):
        text = generate_trace(simple_config(), seed=9).to_jsonl()
        lines = text.splitlines()
        lines[3] = lines[3][: len(lines[3]) // 2]
        with pytest.raises(ValueError, match="line 4"):
            Trace.from_jsonl("\n".join(lines))

    def test_missing_header_rejected(self):
        with pytest.raises(ValueError, match="header"):
            Trace.from_jsonl('{"type": "harvest", "month": 1, "deployment_id": "x"}\n')
