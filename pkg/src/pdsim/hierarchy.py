"""Power-delivery hierarchy construction.

Builds the rooted capacity tree for a named electrical design, from the
substation down to rows, with balanced row-to-line-up wiring.

Two redundancy families are supported:

* distributed xN/y: x line-ups jointly provide y line-ups of usable
  high-availability capacity, so each line-up may carry at most (y/x) of
  its rating as HA load and keeps the rest as shared failover reserve.
* block N+k: N primary line-ups carry load at full rating; k standby
  line-ups carry no IT load and exist purely for failover (but count
  toward provisioned capacity and cost).

Balanced wiring means every admissible feed combination inside a power
domain backs the same number of rows: low-density rows connect to 2
line-ups of their domain, high-density rows to 4, so LD counts must be
multiples of C(n, 2) and HD counts multiples of C(n, 4) per domain (n =
line-ups per domain). Block designs pin each row to a single primary,
so per-class counts must be multiples of primaries-per-domain.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .resources import INF, ResourceVector

AIR_CFM_PER_KW = 165.0  # air-cooling conversion, supply and demand side
TILES_PER_ROW_DEFAULT = 24
HD_ROW_LIQUID_LPM_DEFAULT = 48.0  # 2 LPM x 24 positions
LD_ROW_LIQUID_LPM_DEFAULT = 0.0  # LD rows have no liquid loop


class RedundancyKind(Enum):
    DISTRIBUTED = "distributed"
    BLOCK = "block"


class NodeKind(Enum):
    SUBSTATION = "substation"
    LINEUP = "lineup"
    ROW = "row"


class RowClass(Enum):
    LD = "ld"  # low density, 2 feeds
    HD = "hd"  # high density, 4 feeds


class Tier(Enum):
    HA = "ha"  # survives any single line-up loss
    LA = "la"  # may consume reserve capacity


@dataclass(frozen=True)
class RedundancyConfig:
    """Electrical redundancy topology.

    Distributed designs use (x, y); block designs use (n_primary,
    k_reserve). power_domains partitions the line-ups into independent
    groups wired separately.
    """

    kind: RedundancyKind
    x: int = 0
    y: int = 0
    n_primary: int = 0
    k_reserve: int = 0
    power_domains: int = 1

    def __post_init__(self) -> None:
        if self.power_domains < 1:
            raise ValueError("power_domains must be >= 1")
        if self.kind is RedundancyKind.DISTRIBUTED:
            if not (1 <= self.y < self.x):
                raise ValueError(f"distributed design requires 1 <= y < x, got {self.x}N/{self.y}")
            if self.x % self.power_domains:
                raise ValueError(f"power_domains={self.power_domains} must divide x={self.x}")
        else:
            if self.n_primary < 1 or self.k_reserve < 1:
                raise ValueError("block design requires n_primary >= 1 and k_reserve >= 1")
            if self.n_primary % self.power_domains or self.k_reserve % self.power_domains:
                raise ValueError(
                    f"power_domains={self.power_domains} must divide both "
                    f"n_primary={self.n_primary} and k_reserve={self.k_reserve}"
                )

    @property
    def total_lineups(self) -> int:
        if self.kind is RedundancyKind.DISTRIBUTED:
            return self.x
        return self.n_primary + self.k_reserve

    @property
    def active_lineups(self) -> int:
        """Line-ups' worth of usable HA capacity."""
        return self.y if self.kind is RedundancyKind.DISTRIBUTED else self.n_primary

    @property
    def ha_fraction(self) -> float:
        """Usable HA fraction of a single active line-up's rating."""
        if self.kind is RedundancyKind.DISTRIBUTED:
            return self.y / self.x
        return 1.0

    def label(self) -> str:
        if self.kind is RedundancyKind.DISTRIBUTED:
            return f"{self.x}N/{self.y}"
        return f"{self.n_primary}+{self.k_reserve}"


# Named designs used throughout the evaluation. Domain counts keep the
# binomial wiring multiples practical for the 10-line-up designs.
NAMED_REDUNDANCY = {
    "4N/3": RedundancyConfig(RedundancyKind.DISTRIBUTED, x=4, y=3, power_domains=1),
    "10N/8": RedundancyConfig(RedundancyKind.DISTRIBUTED, x=10, y=8, power_domains=2),
    "3+1": RedundancyConfig(RedundancyKind.BLOCK, n_primary=3, k_reserve=1, power_domains=1),
    "8+2": RedundancyConfig(RedundancyKind.BLOCK, n_primary=8, k_reserve=2, power_domains=2),
}


@dataclass(frozen=True)
class HallDesign:
    """Physical parameterization of one hall of a given redundancy design."""

    redundancy: RedundancyConfig
    lineup_rating_kw: float = 2500.0
    ld_row_rating_kw: float = 625.0
    hd_row_rating_kw: float = 2500.0
    ld_rows: int = 0  # 0 = derive via count_rows
    hd_rows: int = 0
    tiles_per_row: int = TILES_PER_ROW_DEFAULT
    ld_row_liquid_lpm: float = LD_ROW_LIQUID_LPM_DEFAULT
    hd_row_liquid_lpm: float = HD_ROW_LIQUID_LPM_DEFAULT
    name: str = ""

    def label(self) -> str:
        return self.name or self.redundancy.label()

    @property
    def ha_capacity_kw(self) -> float:
        return self.redundancy.active_lineups * self.lineup_rating_kw

    @property
    def provisioned_lineup_kw(self) -> float:
        return self.redundancy.total_lineups * self.lineup_rating_kw

    def resolved_rows(self) -> tuple[int, int]:
        if self.ld_rows > 0 or self.hd_rows > 0:
            return self.ld_rows, self.hd_rows
        return count_rows(self.redundancy)

    def row_rating(self, klass: RowClass) -> ResourceVector:
        if klass is RowClass.LD:
            power = self.ld_row_rating_kw
            liquid = self.ld_row_liquid_lpm
        else:
            power = self.hd_row_rating_kw
            liquid = self.hd_row_liquid_lpm
        return ResourceVector(power, power * AIR_CFM_PER_KW, liquid, self.tiles_per_row)


@dataclass(frozen=True)
class HierarchyNode:
    id: str
    kind: NodeKind
    rated_capacity: ResourceVector
    children: tuple[str, ...] = ()
    feeds: tuple[str, ...] = ()  # row nodes only: distinct parent line-ups


@dataclass(frozen=True)
class LineUp:
    id: str
    index: int
    domain: int
    reserve: bool  # block standby line-up, carries no IT load
    rated_kw: float


@dataclass(frozen=True)
class Row:
    id: str
    index: int
    klass: RowClass
    domain: int
    feeds: tuple[str, ...]  # distinct line-ups backing this row
    feed_count: int  # busbar feed count: 2 for LD, 4 for HD
    load_parents: tuple[str, ...]  # line-ups that carry this row's load
    rating: ResourceVector
    adjacent: tuple[str, ...] = ()  # same-class same-domain physical neighbors


@dataclass(frozen=True)
class Hall:
    """Immutable rooted capacity tree for one hall."""

    design: HallDesign
    lineups: tuple[LineUp, ...]
    rows: tuple[Row, ...]
    nodes: dict[str, HierarchyNode] = field(repr=False, default_factory=dict)
    substation_id: str = "substation"

    @property
    def redundancy(self) -> RedundancyConfig:
        return self.design.redundancy

    @property
    def ha_capacity_kw(self) -> float:
        return self.design.ha_capacity_kw

    def active_lineups(self) -> tuple[LineUp, ...]:
        return tuple(l for l in self.lineups if not l.reserve)

    def rows_of(self, klass: RowClass) -> tuple[Row, ...]:
        return tuple(r for r in self.rows if r.klass is klass)


def count_rows(
    redundancy: RedundancyConfig,
    target_ld_hd_ratio: tuple[int, int] = (3, 2),
    base_rows_per_active: tuple[int, int] = (6, 4),
) -> tuple[int, int]:
    """Smallest balanced row counts near the base hall size.

    The base hall carries 6N low-density and 4N high-density rows for N
    active line-ups. Each class count is then rounded to its wiring
    quantum, preferring the rounding whose LD:HD ratio is closest to the
    target, then the one closest to the base counts.
    """
    n_act = redundancy.active_lineups
    base_ld = base_rows_per_active[0] * n_act
    base_hd = base_rows_per_active[1] * n_act
    q_ld, q_hd = row_quanta(redundancy)
    target = target_ld_hd_ratio[0] / target_ld_hd_ratio[1]

    def candidates(base: int, quantum: int) -> list[int]:
        if quantum == 0:  # class not wirable in this design (too few line-ups)
            return [0]
        lo = max(quantum, (base // quantum) * quantum)
        hi = lo + quantum
        return sorted({lo, hi})

    best: Optional[tuple] = None
    for ld in candidates(base_ld, q_ld):
        for hd in candidates(base_hd, q_hd):
            ratio_err = abs(ld / hd - target) if hd else math.inf
            key = (ratio_err, abs(ld - base_ld) + abs(hd - base_hd), ld + hd)
            if best is None or key < best[0]:
                best = (key, (ld, hd))
    assert best is not None
    return best[1]


def row_quanta(redundancy: RedundancyConfig) -> tuple[int, int]:
    """Hall-wide row-count multiples (ld, hd) required for balanced wiring."""
    k = redundancy.power_domains
    per_domain = redundancy.total_lineups // k
    if redundancy.kind is RedundancyKind.BLOCK:
        primaries = redundancy.n_primary // k
        return primaries, primaries
    return k * math.comb(per_domain, 2), k * math.comb(per_domain, 4)


def effective_capacity(
    rated_kw: float,
    redundancy: RedundancyConfig,
    tier: Tier = Tier.HA,
    reserve: bool = False,
) -> float:
    """Usable capacity of a line-up (or any ancestor) after redundancy.

    Distributed HA load sees (y/x) of rating; LA load may use the full
    rating. Block primaries run at full rating; block reserves carry no
    IT load at either tier.
    """
    if redundancy.kind is RedundancyKind.BLOCK:
        return 0.0 if reserve else rated_kw
    if tier is Tier.LA:
        return rated_kw
    return redundancy.ha_fraction * rated_kw


def build_hall(design: HallDesign) -> Hall:
    """Construct the hall tree with balanced row-to-line-up wiring.

    Rows are laid out per power domain as a contiguous LD block followed
    by a contiguous HD block; cross-row power cables may only bridge
    physically adjacent rows, so adjacency is recorded within each block.
    """
    red = design.redundancy
    k = red.power_domains
    ld_rows, hd_rows = design.resolved_rows()
    q_ld, q_hd = row_quanta(red)
    for label, count, quantum in (("LD", ld_rows, q_ld), ("HD", hd_rows, q_hd)):
        if quantum == 0:
            if count:
                raise ValueError(
                    f"{red.label()} has too few line-ups per domain for {label} rows"
                )
        elif count % quantum:
            raise ValueError(
                f"{count} {label} rows violates balance multiple {quantum} for {red.label()}"
            )

    lineups: list[LineUp] = []
    per_domain = red.total_lineups // k
    if red.kind is RedundancyKind.BLOCK:
        prim_per_domain = red.n_primary // k
    else:
        prim_per_domain = per_domain
    for i in range(red.total_lineups):
        domain = i // per_domain
        within = i % per_domain
        reserve = red.kind is RedundancyKind.BLOCK and within >= prim_per_domain
        lineups.append(
            LineUp(
                id=f"lineup-{i:02d}",
                index=i,
                domain=domain,
                reserve=reserve,
                rated_kw=design.lineup_rating_kw,
            )
        )

    rows: list[Row] = []
    index = 0
    for domain in range(k):
        domain_lineups = [l for l in lineups if l.domain == domain]
        actives = [l for l in domain_lineups if not l.reserve]
        reserves = [l for l in domain_lineups if l.reserve]
        for klass, total in ((RowClass.LD, ld_rows // k), (RowClass.HD, hd_rows // k)):
            if total == 0:
                continue
            feed_count = 2 if klass is RowClass.LD else 4
            if red.kind is RedundancyKind.DISTRIBUTED:
                combos = list(itertools.combinations(actives, feed_count))
            else:
                combos = [(primary,) for primary in actives]
            # Rows of one feed group are physically contiguous, so block
            # zones (a primary and its rows) stay adjacent and cross-row
            # cables rarely escape a primary except at zone boundaries.
            group = max(1, total // len(combos))
            block: list[Row] = []
            for j in range(total):
                combo = combos[min(j // group, len(combos) - 1)]
                if red.kind is RedundancyKind.DISTRIBUTED:
                    feeds = tuple(l.id for l in combo)
                    load_parents = feeds
                else:
                    feeds = tuple(l.id for l in combo) + tuple(l.id for l in reserves)
                    load_parents = (combo[0].id,)
                block.append(
                    Row(
                        id=f"row-{index:03d}",
                        index=index,
                        klass=klass,
                        domain=domain,
                        feeds=feeds,
                        feed_count=feed_count,
                        load_parents=load_parents,
                        rating=design.row_rating(klass),
                        adjacent=(),
                    )
                )
                index += 1
            for pos, row in enumerate(block):
                neighbors = []
                if pos > 0:
                    neighbors.append(block[pos - 1].id)
                if pos + 1 < len(block):
                    neighbors.append(block[pos + 1].id)
                rows.append(
                    Row(
                        id=row.id,
                        index=row.index,
                        klass=row.klass,
                        domain=row.domain,
                        feeds=row.feeds,
                        feed_count=row.feed_count,
                        load_parents=row.load_parents,
                        rating=row.rating,
                        adjacent=tuple(neighbors),
                    )
                )

    nodes: dict[str, HierarchyNode] = {}
    for row in rows:
        nodes[row.id] = HierarchyNode(row.id, NodeKind.ROW, row.rating, feeds=row.feeds)
    row_air = sum(r.rating.air_cfm for r in rows)
    row_liquid = sum(r.rating.liquid_lpm for r in rows)
    row_tiles = sum(r.rating.tiles for r in rows)
    lineup_children: dict[str, list[str]] = {l.id: [] for l in lineups}
    for row in rows:
        for parent in row.feeds:
            lineup_children[parent].append(row.id)
    for lineup in lineups:
        nodes[lineup.id] = HierarchyNode(
            lineup.id,
            NodeKind.LINEUP,
            ResourceVector(lineup.rated_kw, INF, INF, INF),
            children=tuple(lineup_children[lineup.id]),
        )
    nodes["substation"] = HierarchyNode(
        "substation",
        NodeKind.SUBSTATION,
        ResourceVector(design.provisioned_lineup_kw, row_air, row_liquid, row_tiles),
        children=tuple(l.id for l in lineups),
    )
    return Hall(design=design, lineups=tuple(lineups), rows=tuple(rows), nodes=nodes)


def named_design(name: str, **overrides) -> HallDesign:
    if name not in NAMED_REDUNDANCY:
        raise KeyError(f"unknown design {name!r}; known: {sorted(NAMED_REDUNDANCY)}")
    return HallDesign(redundancy=NAMED_REDUNDANCY[name], name=name, **overrides)
