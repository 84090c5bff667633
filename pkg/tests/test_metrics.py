import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pdsim.arrivals import Deployment, single_sku_stream
from pdsim.hardware import VERA_RUBIN_NVL72, HardwareClass, Scenario, cooling_demand
from pdsim.hierarchy import RowClass, Tier, named_design
from pdsim.metrics import (
    DEFAULT_COST_MODEL,
    ComponentCost,
    CostBasis,
    effective_cost,
    flat_cost_per_mw,
    hall_capex,
    initial_cost_per_mw,
    pod_payoff,
    smallest_probes,
    stranded_capacity,
)
from pdsim.placement import FleetState, Policy, check_feasible, single_hall_mc


def rack(power, klass=HardwareClass.COMPUTE, racks=1, ident="d0"):
    return Deployment(
        id=ident,
        klass=klass,
        sku_power_kw=power / racks,
        demand=cooling_demand(klass, power, racks=racks),
        tier=Tier.HA,
        feeds=4 if klass is HardwareClass.GPU else 2,
        quantum=racks,
        pod_racks=racks if klass is HardwareClass.GPU else 1,
        arrival_month=0,
        lifetime_months=60,
        harvest_month=None,
        harvest_fraction=0.0,
    )


class TestStranding:
    def test_empty_hall_nothing_stranded(self):
        state = FleetState([named_design("4N/3")], seed=0)
        state.add_hall()
        report = stranded_capacity(state, [rack(100.0)])
        assert report.site.stranded == 0.0
        assert report.site.unused == report.site.provisioned == 7500.0

    def test_saturated_hall_strands_all_unused(self):
        design = named_design("3+1")
        sku = rack(1300.0)
        results = single_hall_mc(
            design,
            lambda rng: single_sku_stream(sku),
            trials=1,
            seed=0,
            probes_fn=lambda: [sku],
            harvest=False,
        )
        report = results[0].stranding
        assert report.site.stranded == pytest.approx(report.site.unused)
        # one 1300 kW rack per 2500 kW primary: leftover fraction 0.48
        assert report.site_stranded_fraction() == pytest.approx(0.48)

    def test_liquid_exhaustion_strands_power_for_gpu_class(self):
        design = named_design("4N/3", hd_row_liquid_lpm=2.0)
        state = FleetState([design], seed=0)
        state.add_hall()
        hall = state.halls[0]
        for row in hall.hall.rows_of(RowClass.HD):
            d = rack(200.0, HardwareClass.GPU, ident=f"g-{row.id}")
            placement, _ = check_feasible(hall, row, d)
            assert placement is not None and placement.row_id == row.id
            from pdsim.placement import apply_placement

            apply_placement(hall, placement)
            state.placements[d.id] = placement
        probes = [rack(200.0, HardwareClass.GPU, ident="pg"), rack(20.0, ident="pc")]
        report = stranded_capacity(state, probes, class_weights={"gpu": 0.5, "compute": 0.5})
        hall_report = report.halls[0]
        unused = sum(n.unused for n in hall_report.lineups)
        # no HD row can take another GPU rack, so all line-up headroom is
        # stranded for the GPU class while compute still fits
        assert hall_report.per_class_stranded_kw["gpu"] == pytest.approx(unused)
        assert hall_report.per_class_stranded_kw["compute"] == 0.0
        assert hall_report.hall.stranded == pytest.approx(0.5 * unused)

    def test_placement_never_increases_unused(self):
        state = FleetState([named_design("4N/3")], seed=0)
        state.add_hall()
        probes = [rack(50.0, ident="probe")]
        before = stranded_capacity(state, probes).site.unused
        state.place(rack(400.0, ident="a"))
        after = stranded_capacity(state, probes).site.unused
        assert after <= before

    def test_detection_matches_brute_force_probe_scan(self):
        # Straight-line recomputation: a line-up's unused headroom is
        # stranded iff no row that loads onto it can take the probe.
        state = FleetState([named_design("4N/3")], seed=1)
        state.add_hall()
        rng = np.random.Generator(np.random.PCG64(2))
        for i in range(40):
            power = float(rng.integers(100, 600))
            state.place(rack(power, ident=f"r{i}"))
        probe = rack(450.0, ident="probe")
        report = stranded_capacity(state, [probe])
        hall = state.halls[0]
        red = hall.hall.redundancy
        for node in report.halls[0].lineups:
            expected_stranded = node.unused
            for row in hall.hall.rows:
                if node.node_id not in row.load_parents:
                    continue
                spare = row.rating.power_kw - hall.row_power[row.id]
                tiles_ok = hall.row_tiles[row.id] + 1 <= 24
                air_ok = (
                    hall.row_air[row.id] + probe.demand.air_cfm
                    <= row.rating.air_cfm + 1e-6
                )
                need = probe.demand.power_kw / (row.feed_count - 1)
                feeds_ok = all(
                    hall.eff_ha[p] - hall.lineup_load[p] + 1e-6 >= need
                    for p in row.feeds
                )
                share_ok = all(
                    hall.lineup_load[p] + probe.demand.power_kw / len(row.load_parents)
                    <= hall.eff_ha[p] + 1e-6
                    for p in row.load_parents
                )
                if spare + 1e-6 >= probe.demand.power_kw and tiles_ok and air_ok and feeds_ok and share_ok:
                    expected_stranded = 0.0
                    break
            assert node.stranded == pytest.approx(expected_stranded)


class TestProbes:
    def test_probe_units_mirror_arrivals(self):
        probes = smallest_probes(
            2030, Scenario.MED, VERA_RUBIN_NVL72, pod_racks=3, nongpu_quantum=10
        )
        by_class = {p.klass: p for p in probes}
        gpu = by_class[HardwareClass.GPU]
        assert gpu.pod_racks == 3
        assert gpu.demand.tiles == 3
        compute = by_class[HardwareClass.COMPUTE]
        assert compute.quantum == 10
        assert compute.demand.power_kw == pytest.approx(10 * 0.25 * 20 * 1.05**5)


class TestCostModel:
    def test_flat_sum_is_exactly_10381k(self):
        assert flat_cost_per_mw() == 10_381_000.0

    def test_anchor_pair(self):
        dist = initial_cost_per_mw(named_design("4N/3"))
        block = initial_cost_per_mw(named_design("3+1"))
        assert abs(dist - 10.0e6) / 10.0e6 < 0.05
        assert abs(block - 10.3e6) / 10.3e6 < 0.05
        assert block > dist

    def test_linearity_in_component_rates(self):
        design = named_design("3+1")
        base = hall_capex(design)
        bumped = []
        for component in DEFAULT_COST_MODEL:
            doubled = ComponentCost(
                component.name, component.usd_per_mw * 2, component.basis, component.block_only
            )
            model = [doubled if c.name == component.name else c for c in DEFAULT_COST_MODEL]
            bumped.append(hall_capex(design, model) - base)
        # each delta equals the component's own contribution
        assert sum(bumped) == pytest.approx(base)

    def test_lineup_basis_includes_reserves(self):
        # 3+1 and 4N/3 have equal provisioned line-up MW; the block-only
        # static transfer switches are the differentiator.
        sts = [c for c in DEFAULT_COST_MODEL if c.block_only]
        assert len(sts) == 1 and sts[0].basis is CostBasis.LINEUP_MW
        dist = hall_capex(named_design("4N/3"))
        block = hall_capex(named_design("3+1"))
        assert block - dist == pytest.approx(sts[0].usd_per_mw * 10.0)


class TestEffectiveCost:
    def test_single_full_hall_equals_initial(self):
        design = named_design("4N/3")
        capex = hall_capex(design)
        assert effective_cost([(capex, 7.5)]) == pytest.approx(initial_cost_per_mw(design))

    def test_two_hall_example(self):
        assert effective_cost([(75e6, 7.0), (75e6, 6.5)]) == pytest.approx(150e6 / 13.5)

    def test_partial_fill_raises_effective_cost(self):
        capex = hall_capex(named_design("4N/3"))
        assert effective_cost([(capex, 6.0)]) > initial_cost_per_mw(named_design("4N/3"))

    def test_zero_deployed_rejected(self):
        with pytest.raises(ValueError):
            effective_cost([(75e6, 0.0)])


class TestPodPayoff:
    def test_reference_points(self):
        assert pod_payoff(0.0, 0.0) == 0.0
        assert pod_payoff(0.2, 0.1) == pytest.approx(0.0909, abs=1e-4)
        assert pod_payoff(0.3, 0.3) == pytest.approx(0.0)

    @given(
        st.floats(min_value=-0.5, max_value=2.0),
        st.floats(min_value=-0.5, max_value=2.0),
    )
    def test_sign_matches_delta_difference(self, d_tpsw, d_cost):
        payoff = pod_payoff(d_tpsw, d_cost)
        assert math.copysign(1, payoff) == math.copysign(1, d_tpsw - d_cost) or payoff == 0

    def test_guard_at_minus_one(self):
        with pytest.raises(ValueError):
            pod_payoff(0.1, -1.0)
