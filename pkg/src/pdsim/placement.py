"""Online rack/pod placement under hierarchical redundancy constraints.

A placement must fit every ancestor of its row on every resource axis.
On top of plain capacity, distributed designs enforce a failover rule:
a high-availability deployment drawing P through a row with k feeds
needs headroom of P/(k-1) on *each* feed line-up simultaneously, so a
hall can hold plenty of aggregate slack and still reject an arrival.
Block designs skip the failover rule (dedicated reserves) but pin every
row's load to a single primary, quantizing usable capacity.

GPU deployments are restricted to high-density rows. Single racks are
indivisible, but when a multi-rack pod's power exceeds the home row's
spare busbar capacity, cross-row cables may draw the deficit from the
two physically adjacent rows (power only, not tiles or cooling).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from .arrivals import Deployment, Trace
from .hardware import HardwareClass
from .hierarchy import (
    Hall,
    HallDesign,
    RedundancyKind,
    Row,
    RowClass,
    Tier,
    build_hall,
    effective_capacity,
)

EPS = 1e-6


def failover_headroom(power_kw: float, feeds: int) -> float:
    """Required headroom on each surviving parent if one of `feeds` fails."""
    if feeds < 2:
        raise ValueError("failover headroom needs at least 2 feeds")
    return power_kw / (feeds - 1)


def block_leftover(usable_kw: float, deployment_kw: float) -> float:
    """Stranded fraction of a block loaded with identical deployments."""
    if usable_kw <= 0 or deployment_kw <= 0:
        raise ValueError("capacities must be positive")
    admitted = int(usable_kw // deployment_kw)
    return (usable_kw - admitted * deployment_kw) / usable_kw


@dataclass(frozen=True)
class FeasibilityReport:
    ok: bool
    level: str = ""  # "row" | "lineup"
    resource: str = ""  # "power_kw" | "air_cfm" | "liquid_lpm" | "tiles"
    check: str = ""  # "capacity" | "failover" | "class"
    node_id: str = ""
    available: float = 0.0
    required: float = 0.0

    # Placement failures report the deepest constraint reached across
    # candidate rows, so a fleet-level rejection names the rule that
    # actually binds rather than the first exhausted row.
    _DEPTH = {("row", "class"): 0, ("row", "capacity"): 1, ("lineup", "capacity"): 2, ("lineup", "failover"): 3}

    @property
    def depth(self) -> int:
        return self._DEPTH.get((self.level, self.check), 0)

    @staticmethod
    def feasible() -> "FeasibilityReport":
        return FeasibilityReport(ok=True)


@dataclass
class Placement:
    """Applied placement with enough detail to invert it exactly."""

    deployment: Deployment
    hall_index: int
    row_id: str
    tiles: float
    row_draws_kw: dict[str, float]  # home row plus any cross-row donors
    lineup_debits_kw: dict[str, float]
    air_cfm: float
    liquid_lpm: float
    harvested: bool = False


@dataclass(frozen=True)
class PlacementFailure:
    deployment_id: str
    report: FeasibilityReport


class Policy(Enum):
    MIN_WASTE = "min-waste"
    RANDOM = "random"
    ROUND_ROBIN = "round-robin"
    VARIANCE_MIN = "variance-min"


class HallState:
    """Mutable load ledgers over an immutable hall tree."""

    __slots__ = (
        "hall",
        "index",
        "rows_by_id",
        "row_power",
        "row_air",
        "row_liquid",
        "row_tiles",
        "lineup_load",
        "eff_ha",
        "eff_la",
        "total_load_kw",
    )

    def __init__(self, hall: Hall, index: int):
        self.hall = hall
        self.index = index
        self.rows_by_id = {r.id: r for r in hall.rows}
        self.row_power = {r.id: 0.0 for r in hall.rows}
        self.row_air = {r.id: 0.0 for r in hall.rows}
        self.row_liquid = {r.id: 0.0 for r in hall.rows}
        self.row_tiles = {r.id: 0.0 for r in hall.rows}
        self.lineup_load = {l.id: 0.0 for l in hall.lineups}
        red = hall.redundancy
        self.eff_ha = {
            l.id: effective_capacity(l.rated_kw, red, Tier.HA, l.reserve) for l in hall.lineups
        }
        self.eff_la = {
            l.id: effective_capacity(l.rated_kw, red, Tier.LA, l.reserve) for l in hall.lineups
        }
        self.total_load_kw = 0.0

    def lineup_headroom_kw(self, lineup_id: str, tier: Tier = Tier.HA) -> float:
        cap = self.eff_ha[lineup_id] if tier is Tier.HA else self.eff_la[lineup_id]
        return cap - self.lineup_load[lineup_id]

    def ha_slack_kw(self) -> float:
        return sum(max(0.0, self.eff_ha[l.id] - self.lineup_load[l.id]) for l in self.hall.lineups)

    def row_power_spare(self, row: Row) -> float:
        return row.rating.power_kw - self.row_power[row.id]


def _row_allowance(
    state: HallState, row: Row, tier: Tier, scratch: dict[str, float]
) -> float:
    """Power one row can still route upstream.

    Block rows forward their full draw to one primary. Distributed rows
    split the draw across their feeds, and an HA draw additionally
    needs draw/(feeds-1) of failover headroom on every feed, which is
    the binding limit: draw <= (feeds-1) * min feed headroom.
    """
    parents = row.load_parents
    if state.hall.redundancy.kind is RedundancyKind.BLOCK:
        lineup_id = parents[0]
        cap = state.eff_ha[lineup_id] if tier is Tier.HA else state.eff_la[lineup_id]
        return cap - scratch.get(lineup_id, state.lineup_load[lineup_id])
    headrooms = []
    for parent in row.feeds:
        cap = state.eff_ha[parent] if tier is Tier.HA else state.eff_la[parent]
        headrooms.append(cap - scratch.get(parent, state.lineup_load[parent]))
    factor = (row.feed_count - 1) if tier is Tier.HA else row.feed_count
    return factor * min(headrooms)


def _plan_row_draws(
    state: HallState, row: Row, d: Deployment
) -> tuple[Optional[dict[str, float]], FeasibilityReport]:
    """Split deployment power across the home row and adjacent donors.

    A single-rack deployment is indivisible: it draws everything
    through the home row or nowhere, so the failover rule always sees
    its full power. Cross-row cables exist for multi-rack GPU pods
    whose power exceeds the home row's spare busbar capacity; each
    involved row then contributes at most its busbar spare and its
    upstream allowance.
    """
    power = d.demand.power_kw
    spare = state.row_power_spare(row)
    if power <= spare + EPS:
        return {row.id: power}, FeasibilityReport.feasible()
    if d.klass is not HardwareClass.GPU or d.pod_racks < 2:
        return None, FeasibilityReport(
            False, "row", "power_kw", "capacity", row.id, spare, power
        )
    scratch: dict[str, float] = {}
    draws: dict[str, float] = {}
    deficit = power
    for row_id in (row.id, *row.adjacent):
        if deficit <= EPS:
            break
        carrier = state.rows_by_id[row_id]
        take = min(
            deficit,
            max(state.row_power_spare(carrier), 0.0),
            max(_row_allowance(state, carrier, d.tier, scratch), 0.0),
        )
        if take > EPS:
            draws[row_id] = take
            deficit -= take
            share = take / len(carrier.load_parents)
            for parent in carrier.load_parents:
                scratch[parent] = scratch.get(parent, state.lineup_load[parent]) + share
    if deficit > EPS:
        return None, FeasibilityReport(
            False, "row", "power_kw", "capacity", row.id,
            power - deficit, power,
        )
    return draws, FeasibilityReport.feasible()


def check_feasible(
    state: HallState, row: Row, d: Deployment
) -> tuple[Optional[Placement], FeasibilityReport]:
    """Full ancestor-path feasibility for placing d with its racks in `row`."""
    if d.klass is HardwareClass.GPU and row.klass is not RowClass.HD:
        return None, FeasibilityReport(False, "row", "power_kw", "class", row.id, 0.0, 0.0)

    draws, report = _plan_row_draws(state, row, d)
    if draws is None:
        return None, report

    cap = row.rating
    if state.row_tiles[row.id] + d.demand.tiles > cap.tiles + EPS:
        return None, FeasibilityReport(
            False, "row", "tiles", "capacity", row.id,
            cap.tiles - state.row_tiles[row.id], d.demand.tiles,
        )
    if state.row_air[row.id] + d.demand.air_cfm > cap.air_cfm + EPS:
        return None, FeasibilityReport(
            False, "row", "air_cfm", "capacity", row.id,
            cap.air_cfm - state.row_air[row.id], d.demand.air_cfm,
        )
    if state.row_liquid[row.id] + d.demand.liquid_lpm > cap.liquid_lpm + EPS:
        return None, FeasibilityReport(
            False, "row", "liquid_lpm", "capacity", row.id,
            cap.liquid_lpm - state.row_liquid[row.id], d.demand.liquid_lpm,
        )

    distributed = state.hall.redundancy.kind is RedundancyKind.DISTRIBUTED
    debits: dict[str, float] = {}
    scratch: dict[str, float] = {}
    for row_id, draw in draws.items():
        carrier = state.rows_by_id[row_id]
        # Failover: every feed parent of a carrying row must hold
        # headroom for that row's draw shifting to the survivors. An
        # indivisible single-row deployment draws its full power here,
        # so this reduces to the per-deployment headroom rule.
        if distributed and d.tier is Tier.HA:
            need = failover_headroom(draw, carrier.feed_count)
            for parent in sorted(carrier.feeds):
                headroom = state.eff_ha[parent] - scratch.get(
                    parent, state.lineup_load[parent]
                )
                if headroom + EPS < need:
                    return None, FeasibilityReport(
                        False, "lineup", "power_kw", "failover", parent, headroom, need
                    )
        share = draw / len(carrier.load_parents)
        for parent in sorted(carrier.load_parents):
            load = scratch.get(parent, state.lineup_load[parent])
            cap_kw = state.eff_ha[parent] if d.tier is Tier.HA else state.eff_la[parent]
            if load + share > cap_kw + EPS:
                return None, FeasibilityReport(
                    False, "lineup", "power_kw", "capacity", parent, cap_kw - load, share
                )
        for parent in carrier.load_parents:
            scratch[parent] = scratch.get(parent, state.lineup_load[parent]) + share
            debits[parent] = debits.get(parent, 0.0) + share

    placement = Placement(
        deployment=d,
        hall_index=state.index,
        row_id=row.id,
        tiles=d.demand.tiles,
        row_draws_kw=draws,
        lineup_debits_kw=debits,
        air_cfm=d.demand.air_cfm,
        liquid_lpm=d.demand.liquid_lpm,
    )
    return placement, FeasibilityReport.feasible()


def apply_placement(state: HallState, p: Placement) -> None:
    for row_id, draw in p.row_draws_kw.items():
        state.row_power[row_id] += draw
    for lineup_id, debit in p.lineup_debits_kw.items():
        state.lineup_load[lineup_id] += debit
    state.row_air[p.row_id] += p.air_cfm
    state.row_liquid[p.row_id] += p.liquid_lpm
    state.row_tiles[p.row_id] += p.tiles
    state.total_load_kw += sum(p.row_draws_kw.values())


def revert_placement(state: HallState, p: Placement) -> None:
    for row_id, draw in p.row_draws_kw.items():
        state.row_power[row_id] -= draw
    for lineup_id, debit in p.lineup_debits_kw.items():
        state.lineup_load[lineup_id] -= debit
    state.row_air[p.row_id] -= p.air_cfm
    state.row_liquid[p.row_id] -= p.liquid_lpm
    state.row_tiles[p.row_id] -= p.tiles
    state.total_load_kw -= sum(p.row_draws_kw.values())


def harvest_placement(state: HallState, p: Placement) -> None:
    """Release the harvest fraction of power and cooling; tiles stay."""
    if p.harvested:
        return
    f = p.deployment.harvest_fraction
    if f <= 0:
        p.harvested = True
        return
    for row_id in list(p.row_draws_kw):
        released = p.row_draws_kw[row_id] * f
        state.row_power[row_id] -= released
        p.row_draws_kw[row_id] -= released
        state.total_load_kw -= released
    for lineup_id in list(p.lineup_debits_kw):
        released = p.lineup_debits_kw[lineup_id] * f
        state.lineup_load[lineup_id] -= released
        p.lineup_debits_kw[lineup_id] -= released
    state.row_air[p.row_id] -= p.air_cfm * f
    p.air_cfm -= p.air_cfm * f
    state.row_liquid[p.row_id] -= p.liquid_lpm * f
    p.liquid_lpm -= p.liquid_lpm * f
    p.harvested = True


class FleetState:
    """Halls, active placements, and load ledgers for one simulation."""

    def __init__(
        self,
        designs: list[HallDesign],
        policy: Policy = Policy.VARIANCE_MIN,
        seed: int = 0,
        allow_new_halls: bool = True,
    ):
        if not designs:
            raise ValueError("at least one hall design is required")
        self.designs = designs
        self.policy = policy
        self.halls: list[HallState] = []
        self.placements: dict[str, Placement] = {}
        self.month = 0
        self.allow_new_halls = allow_new_halls
        self.rng = np.random.Generator(np.random.PCG64(seed))
        self._design_cursor = 0
        self._rr_cursor = 0
        self.rejected: list[Deployment] = []
        self.deployed_kw: dict[HardwareClass, float] = {k: 0.0 for k in HardwareClass}

    @property
    def halls_built(self) -> int:
        return len(self.halls)

    def provisioned_ha_kw(self) -> float:
        return sum(h.hall.ha_capacity_kw for h in self.halls)

    def total_load_kw(self) -> float:
        return sum(h.total_load_kw for h in self.halls)

    def add_hall(self) -> HallState:
        design = self.designs[self._design_cursor % len(self.designs)]
        self._design_cursor += 1
        state = HallState(build_hall(design), len(self.halls))
        self.halls.append(state)
        return state

    def aggregate_lineup_slack_kw(self) -> float:
        return sum(h.ha_slack_kw() for h in self.halls)

    # -- policy machinery ------------------------------------------------

    def _candidate_rows(self, d: Deployment) -> Iterator[tuple[HallState, Row]]:
        for hall_state in self.halls:
            if hall_state.ha_slack_kw() + EPS < d.demand.power_kw:
                continue
            rows = (
                hall_state.hall.rows_of(RowClass.HD)
                if d.klass is HardwareClass.GPU
                else hall_state.hall.rows
            )
            for row in rows:
                yield hall_state, row

    def _variance_score(self, hall_state: HallState, placement: Placement) -> float:
        """Fleet-wide second moment of line-up load fractions after placing."""
        score = 0.0
        for other in self.halls:
            for lineup in other.hall.lineups:
                eff = other.eff_ha[lineup.id]
                if eff <= 0:
                    continue
                load = other.lineup_load[lineup.id]
                if other is hall_state:
                    load += placement.lineup_debits_kw.get(lineup.id, 0.0)
                score += (load / eff) ** 2
        return score

    def place(self, d: Deployment) -> Placement | PlacementFailure:
        """Choose a feasible location per the active policy and apply it."""
        deepest_failure: Optional[FeasibilityReport] = None

        if self.policy is Policy.ROUND_ROBIN:
            chosen = self._place_round_robin(d)
            if chosen is None:
                return PlacementFailure(d.id, self._probe_failure(d))
            apply_placement(self.halls[chosen.hall_index], chosen)
            self._register(chosen)
            return chosen

        best: Optional[tuple[tuple, Placement]] = None
        feasible: list[Placement] = []
        for hall_state, row in self._candidate_rows(d):
            placement, report = check_feasible(hall_state, row, d)
            if placement is None:
                if report.level and (
                    deepest_failure is None or report.depth > deepest_failure.depth
                ):
                    deepest_failure = report
                continue
            if self.policy is Policy.RANDOM:
                feasible.append(placement)
                continue
            if self.policy is Policy.MIN_WASTE:
                waste = hall_state.row_power_spare(row) - placement.row_draws_kw.get(row.id, 0.0)
                key = (waste, hall_state.index, row.index)
            else:  # VARIANCE_MIN
                key = (
                    self._variance_score(hall_state, placement),
                    hall_state.index,
                    row.index,
                )
            if best is None or key < best[0]:
                best = (key, placement)

        if self.policy is Policy.RANDOM and feasible:
            pick = feasible[int(self.rng.integers(len(feasible)))]
            apply_placement(self.halls[pick.hall_index], pick)
            self._register(pick)
            return pick
        if best is not None:
            placement = best[1]
            apply_placement(self.halls[placement.hall_index], placement)
            self._register(placement)
            return placement
        if deepest_failure is None:
            deepest_failure = self._probe_failure(d)
        return PlacementFailure(d.id, deepest_failure)

    def _place_round_robin(self, d: Deployment) -> Optional[Placement]:
        slots = [
            (h, row)
            for h in self.halls
            for row in (
                h.hall.rows_of(RowClass.HD) if d.klass is HardwareClass.GPU else h.hall.rows
            )
        ]
        if not slots:
            return None
        n = len(slots)
        for step in range(n):
            hall_state, row = slots[(self._rr_cursor + step) % n]
            placement, _ = check_feasible(hall_state, row, d)
            if placement is not None:
                self._rr_cursor = (self._rr_cursor + step + 1) % n
                return placement
        return None

    def _probe_failure(self, d: Deployment) -> FeasibilityReport:
        deepest: Optional[FeasibilityReport] = None
        for hall_state in self.halls:
            rows = (
                hall_state.hall.rows_of(RowClass.HD)
                if d.klass is HardwareClass.GPU
                else hall_state.hall.rows
            )
            for row in rows:
                _, report = check_feasible(hall_state, row, d)
                if not report.ok and (deepest is None or report.depth > deepest.depth):
                    deepest = report
        if deepest is not None:
            return deepest
        return FeasibilityReport(False, "fleet", "power_kw", "capacity", "", 0.0, d.demand.power_kw)

    def _register(self, placement: Placement) -> None:
        self.placements[placement.deployment.id] = placement
        self.deployed_kw[placement.deployment.klass] += placement.deployment.demand.power_kw

    # -- lifecycle events ------------------------------------------------

    def harvest(self, deployment_id: str) -> None:
        placement = self.placements.get(deployment_id)
        if placement is not None:
            before = sum(placement.row_draws_kw.values())
            harvest_placement(self.halls[placement.hall_index], placement)
            self.deployed_kw[placement.deployment.klass] -= before - sum(
                placement.row_draws_kw.values()
            )

    def decommission(self, deployment_id: str) -> None:
        placement = self.placements.pop(deployment_id, None)
        if placement is not None:
            revert_placement(self.halls[placement.hall_index], placement)
            self.deployed_kw[placement.deployment.klass] -= sum(
                placement.row_draws_kw.values()
            )

    def audit(self) -> None:
        """Recompute every ledger from active placements; raise on drift."""
        for hall_state in self.halls:
            row_power = {r: 0.0 for r in hall_state.row_power}
            row_air = {r: 0.0 for r in hall_state.row_air}
            row_liquid = {r: 0.0 for r in hall_state.row_liquid}
            row_tiles = {r: 0.0 for r in hall_state.row_tiles}
            lineup = {l: 0.0 for l in hall_state.lineup_load}
            for placement in self.placements.values():
                if placement.hall_index != hall_state.index:
                    continue
                for row_id, draw in placement.row_draws_kw.items():
                    row_power[row_id] += draw
                for lineup_id, debit in placement.lineup_debits_kw.items():
                    lineup[lineup_id] += debit
                row_air[placement.row_id] += placement.air_cfm
                row_liquid[placement.row_id] += placement.liquid_lpm
                row_tiles[placement.row_id] += placement.tiles
            for mapping, recomputed in (
                (hall_state.row_power, row_power),
                (hall_state.row_air, row_air),
                (hall_state.row_liquid, row_liquid),
                (hall_state.row_tiles, row_tiles),
                (hall_state.lineup_load, lineup),
            ):
                for key, value in recomputed.items():
                    if abs(mapping[key] - value) > 1e-6:
                        raise AssertionError(
                            f"ledger drift at {key}: {mapping[key]} vs recomputed {value}"
                        )


# -- single-hall Monte Carlo ---------------------------------------------


@dataclass
class SingleHallResult:
    trial: int
    placed: int
    stranding: "object"  # metrics.StrandingReport; typed loosely to avoid a cycle
    state: FleetState


def single_hall_mc(
    design: HallDesign,
    stream_factory: Callable[[np.random.Generator], Iterable[Deployment]],
    trials: int,
    seed: int,
    probes_fn: Callable[[], list[Deployment]],
    policy: Policy = Policy.VARIANCE_MIN,
    harvest: bool = True,
    fail_limit: int = 100,
    class_weights: Optional[dict[str, float]] = None,
) -> list[SingleHallResult]:
    """Saturate one hall per trial: place until `fail_limit` consecutive
    arrivals fail, harvest once, then place until they fail again."""
    from .metrics import stranded_capacity  # local import to avoid a cycle

    if trials < 1:
        raise ValueError("trials must be >= 1")
    results = []
    seeds = np.random.SeedSequence(seed).spawn(trials)
    for trial in range(trials):
        rng = np.random.Generator(np.random.PCG64(seeds[trial]))
        state = FleetState([design], policy=policy, seed=seed + trial, allow_new_halls=False)
        state.add_hall()
        consecutive = 0
        harvested_phase = False
        placed = 0
        for d in stream_factory(rng):
            outcome = state.place(d)
            if isinstance(outcome, PlacementFailure):
                consecutive += 1
                if consecutive >= fail_limit:
                    if harvest and not harvested_phase:
                        for deployment_id in list(state.placements):
                            state.harvest(deployment_id)
                        harvested_phase = True
                        consecutive = 0
                    else:
                        break
            else:
                consecutive = 0
                placed += 1
        report = stranded_capacity(state, probes_fn(), class_weights=class_weights)
        results.append(SingleHallResult(trial, placed, report, state))
    return results


# -- fleet simulation ------------------------------------------------------


@dataclass
class FleetSnapshot:
    month: int
    deployed_mw: dict[str, float]
    provisioned_mw: float
    halls_built: int
    stranded_fraction_p50: float
    stranded_fraction_p90: float
    rejected_mw: float


@dataclass
class FleetRun:
    snapshots: list[FleetSnapshot]
    state: FleetState
    design: HallDesign


def _fresh_hall_fits(design: HallDesign, d: Deployment) -> bool:
    probe = HallState(build_hall(design), 0)
    for row in probe.hall.rows:
        placement, _ = check_feasible(probe, row, d)
        if placement is not None:
            return True
    return False


def fleet_sim(
    designs: list[HallDesign],
    trace: Trace,
    policy: Policy = Policy.VARIANCE_MIN,
    seed: int = 0,
    probes_fn: Optional[Callable[[int], list[Deployment]]] = None,
    snapshot_every: int = 1,
    class_weights: Optional[dict[str, float]] = None,
) -> FleetRun:
    """Replay a trace month by month, opening halls instantly on demand.

    Event order within a month: decommissions, then harvests, then
    arrivals. An arrival that cannot fit even a freshly built hall of
    the current design is rejected and logged rather than looping on
    hall construction.
    """
    from .metrics import stranded_capacity

    state = FleetState(designs, policy=policy, seed=seed)
    fresh_fit_cache: dict[tuple, bool] = {}
    snapshots: list[FleetSnapshot] = []
    rejected_kw = 0.0

    events_by_month: dict[int, list] = {}
    for event in trace.events:
        events_by_month.setdefault(event.month, []).append(event)

    for month in range(trace.horizon_months):
        state.month = month
        for event in events_by_month.get(month, ()):
            if event.kind == "decommission":
                state.decommission(event.deployment_id)
            elif event.kind == "harvest":
                state.harvest(event.deployment_id)
            else:
                d = event.deployment
                outcome = state.place(d)
                if isinstance(outcome, PlacementFailure):
                    next_design = designs[state._design_cursor % len(designs)]
                    key = (next_design.label(), round(d.demand.power_kw, 6), d.klass, d.tier)
                    fits = fresh_fit_cache.get(key)
                    if fits is None:
                        fits = _fresh_hall_fits(next_design, d)
                        fresh_fit_cache[key] = fits
                    if not fits:
                        state.rejected.append(d)
                        rejected_kw += d.demand.power_kw
                        continue
                    state.add_hall()
                    outcome = state.place(d)
                    if isinstance(outcome, PlacementFailure):
                        state.rejected.append(d)
                        rejected_kw += d.demand.power_kw

        if month % snapshot_every == 0 or month == trace.horizon_months - 1:
            if probes_fn is not None and state.halls:
                report = stranded_capacity(state, probes_fn(month), class_weights=class_weights)
                fractions = report.hall_stranded_fractions()
                p50 = float(np.percentile(fractions, 50)) if fractions else 0.0
                p90 = float(np.percentile(fractions, 90)) if fractions else 0.0
            else:
                p50 = p90 = 0.0
            snapshots.append(
                FleetSnapshot(
                    month=month,
                    deployed_mw={k.value: v / 1000.0 for k, v in state.deployed_kw.items()},
                    provisioned_mw=state.provisioned_ha_kw() / 1000.0,
                    halls_built=state.halls_built,
                    stranded_fraction_p50=p50,
                    stranded_fraction_p90=p90,
                    rejected_mw=rejected_kw / 1000.0,
                )
            )

    return FleetRun(snapshots=snapshots, state=state, design=designs[0])
