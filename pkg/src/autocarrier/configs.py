"""Enumeration of loading configurations: every admissible
(ramp-or-split, position, vehicle, slide, angle) tuple with precomputed
physics, after OEM exclusions and dimension filters."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .domain import CarrierType, DomainError, Vehicle
from .physics import ConfigPhysics, config_physics, footprint_geometry

__all__ = ["AngleGrid", "DEFAULT_GRID", "Configuration", "ConfigSet", "enumerate_configs"]

log = logging.getLogger(__name__)

POSITIONS = ("forward", "reverse")
SLIDES = ("none", "forward", "reverse")


@dataclass(frozen=True)
class AngleGrid:
    """Discrete slide angles in radians; zero first, strictly increasing."""

    angles: tuple[float, ...]

    def __post_init__(self):
        if not self.angles or self.angles[0] != 0.0:
            raise DomainError("angle grid must start at 0")
        if any(b <= a for a, b in zip(self.angles, self.angles[1:])):
            raise DomainError("angle grid must be strictly increasing")

    @property
    def positive(self) -> tuple[float, ...]:
        return self.angles[1:]


DEFAULT_GRID = AngleGrid(tuple(math.radians(a) for a in (0.0, 3.0, 6.0, 9.0)))
NO_SLIDE_GRID = AngleGrid((0.0,))


@dataclass(frozen=True)
class Configuration:
    """One candidate placement; `footprint` is a single ramp id tuple or a
    split-ramp set."""

    footprint: tuple[int, ...]
    position: str
    vehicle_id: str
    slide: str
    angle: float
    physics: ConfigPhysics = field(compare=False)

    @property
    def signature(self) -> tuple:
        return (self.footprint, self.position, self.vehicle_id, self.slide, self.angle)


@dataclass(frozen=True)
class ConfigSet:
    configs: tuple[Configuration, ...]
    unloadable: tuple[str, ...]  # vehicle ids with no admissible configuration


def enumerate_configs(
    carrier: CarrierType,
    vehicles,
    grid: AngleGrid = DEFAULT_GRID,
    exclusions: frozenset[tuple[str, int, str]] = frozenset(),
) -> ConfigSet:
    """Cartesian product (ramps + splits) x positions x vehicles x slides x
    angles, minus OEM exclusions and wheelbase misfits, in deterministic
    (footprint, vehicle, position, slide, angle) order."""
    footprints = carrier.footprints()
    geoms = {fp: footprint_geometry(carrier, fp) for fp in footprints}
    configs: list[Configuration] = []
    seen: set[str] = set()
    for fp in footprints:
        geom = geoms[fp]
        for vehicle in vehicles:
            if vehicle.wheelbase > geom.base_length:
                continue
            if any((carrier.id, r, vehicle.type_name) in exclusions for r in fp):
                continue
            for position in POSITIONS:
                for slide in SLIDES:
                    if slide == "none":
                        angles = (0.0,)
                    else:
                        angles = tuple(
                            a for a in grid.positive if a <= geom.max_slide_angle + 1e-12
                        )
                    for angle in angles:
                        configs.append(
                            Configuration(
                                footprint=fp,
                                position=position,
                                vehicle_id=vehicle.id,
                                slide=slide,
                                angle=angle,
                                physics=config_physics(carrier, fp, vehicle, slide, angle),
                            )
                        )
                        seen.add(vehicle.id)
    unloadable = tuple(v.id for v in vehicles if v.id not in seen)
    for vid in unloadable:
        log.warning("vehicle %s fits no ramp of carrier %s", vid, carrier.id)
    return ConfigSet(configs=tuple(configs), unloadable=unloadable)
