"""Multi-resource demand and capacity vectors.

Every deployment and every hierarchy node is measured on four axes:
electrical power (kW), air cooling (CFM), direct-to-chip liquid cooling
(LPM), and floor tiles (rack positions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf


@dataclass(frozen=True)
class ResourceVector:
    """Per-deployment demand or per-node capacity across all four resources."""

    power_kw: float = 0.0
    air_cfm: float = 0.0
    liquid_lpm: float = 0.0
    tiles: float = 0.0

    def __post_init__(self) -> None:
        for name in ("power_kw", "air_cfm", "liquid_lpm", "tiles"):
            value = getattr(self, name)
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")

    def __add__(self, other: "ResourceVector") -> "ResourceVector":
        return ResourceVector(
            self.power_kw + other.power_kw,
            self.air_cfm + other.air_cfm,
            self.liquid_lpm + other.liquid_lpm,
            self.tiles + other.tiles,
        )

    def scaled(self, factor: float) -> "ResourceVector":
        return ResourceVector(
            self.power_kw * factor,
            self.air_cfm * factor,
            self.liquid_lpm * factor,
            self.tiles * factor,
        )

    def harvest_portion(self, fraction: float) -> "ResourceVector":
        """Power and cooling released by harvesting; tiles are never released."""
        return ResourceVector(
            self.power_kw * fraction,
            self.air_cfm * fraction,
            self.liquid_lpm * fraction,
            0.0,
        )

    def as_dict(self) -> dict:
        return {
            "power_kw": self.power_kw,
            "air_cfm": self.air_cfm,
            "liquid_lpm": self.liquid_lpm,
            "tiles": self.tiles,
        }


RESOURCES = ("power_kw", "air_cfm", "liquid_lpm", "tiles")

ZERO = ResourceVector()
