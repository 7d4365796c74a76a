"""Static load physics for carrier configurations: axle reactions from the
two-body (tractor + trailer) force/moment balance, slide height gains, the
lower-deck slide allowance, and effective loaded length.

Slide angles are ignored for axle weights: ramps are treated as horizontal
and each vehicle's weight acts below the geometric center of its (possibly
combined) ramp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .domain import CarrierType, DomainError, Ramp, Vehicle

__all__ = [
    "StaticsError",
    "AxleInfluence",
    "ConfigPhysics",
    "axle_influence",
    "influence_at",
    "config_weights",
    "height_gain",
    "lower_allowance",
    "effective_length",
    "footprint_geometry",
    "config_physics",
]


class StaticsError(DomainError):
    """Degenerate axle geometry (coincident supports)."""


@dataclass(frozen=True)
class AxleInfluence:
    """Dimensionless (steer, drive, tandem) reaction shares for a unit weight
    at each footprint's center; shares always sum to 1."""

    shares: dict[tuple[int, ...], tuple[float, float, float]]

    def of(self, footprint: tuple[int, ...]) -> tuple[float, float, float]:
        return self.shares[footprint]


@dataclass(frozen=True)
class ConfigPhysics:
    w_steer: float
    w_drive: float
    w_tandem: float
    l_eff: float
    h_gain: float | None = None  # upper-deck configurations
    h_allow: float | None = None  # lower-deck configurations


def influence_at(carrier: CarrierType, x: float) -> tuple[float, float, float]:
    """Reaction shares for a unit weight whose center sits at signed arm x.

    Loads forward of the kingpin ride on the tractor (steer + drive); loads
    behind it ride on the trailer, which passes its kingpin share through to
    the tractor axles."""
    ax = carrier.axle
    l1 = ax.steer_position
    if abs(l1) < 1e-9:
        raise StaticsError(f"carrier {carrier.id}: steer and drive axles coincide")
    xk = ax.kingpin_offset
    xt = ax.tandem_position
    if abs(xk - xt) < 1e-9:
        raise StaticsError(f"carrier {carrier.id}: kingpin and tandem axle coincide")

    def tractor_shares(xload: float) -> tuple[float, float]:
        # moment about the drive axle: w_steer * l1 = w * xload
        a_steer = xload / l1
        return a_steer, 1.0 - a_steer

    if x > xk:
        a_steer, a_drive = tractor_shares(x)
        return a_steer, a_drive, 0.0
    a_kingpin = (x - xt) / (xk - xt)
    a_tandem = 1.0 - a_kingpin
    s, d = tractor_shares(xk)
    return a_kingpin * s, a_kingpin * d, a_tandem


def footprint_geometry(carrier: CarrierType, footprint: tuple[int, ...]) -> Ramp:
    """Effective ramp for a footprint; split sets combine into one platform
    with the joint center, summed base length, outermost pivots, and the
    most conservative slide cap."""
    if len(footprint) == 1:
        return carrier.ramp(footprint[0])
    members = [carrier.ramp(i) for i in footprint]
    center = sum(r.center_offset for r in members) / len(members)
    front_ramp = max(members, key=lambda r: r.center_offset)
    rear_ramp = min(members, key=lambda r: r.center_offset)
    return Ramp(
        id=min(footprint),
        deck=members[0].deck,
        base_length=sum(r.base_length for r in members),
        center_offset=center,
        pivot_offsets=(
            front_ramp.center_offset + front_ramp.pivot_offsets[0] - center,
            rear_ramp.center_offset + rear_ramp.pivot_offsets[1] - center,
        ),
        max_slide_angle=min(r.max_slide_angle for r in members),
        lower_partner=None,
    )


def axle_influence(carrier: CarrierType) -> AxleInfluence:
    """Influence table over every assignable footprint of the carrier."""
    shares: dict[tuple[int, ...], tuple[float, float, float]] = {}
    for fp in carrier.footprints():
        geom = footprint_geometry(carrier, fp)
        shares[fp] = influence_at(carrier, geom.center_offset)
    return AxleInfluence(shares=shares)


def config_weights(
    weight: float, influence: tuple[float, float, float]
) -> tuple[float, float, float]:
    """Axle reactions contributed by a vehicle of the given weight."""
    return weight * influence[0], weight * influence[1], weight * influence[2]


def _lever(ramp: Ramp, slide: str) -> float:
    # sliding forward rotates about the rear pivot and vice versa; the
    # vehicle's maximum height is taken at the ramp center
    if slide == "forward":
        return abs(ramp.pivot_offsets[1])
    if slide == "reverse":
        return abs(ramp.pivot_offsets[0])
    return 0.0


def height_gain(ramp: Ramp, slide: str, angle: float) -> float:
    """Height gained by sliding an upper-deck ramp: lever times angle (small
    angle approximation of l*sin(phi))."""
    if ramp.deck != "upper":
        raise DomainError(f"ramp {ramp.id}: height gain applies to upper-deck ramps")
    if angle < 0 or angle > ramp.max_slide_angle + 1e-12:
        raise DomainError(
            f"ramp {ramp.id}: slide angle {angle} exceeds cap {ramp.max_slide_angle}"
        )
    if slide == "none" or angle == 0.0:
        return 0.0
    return _lever(ramp, slide) * angle


def lower_allowance(ramp: Ramp, slide: str, angle: float, vehicle_height: float, deck_gap: float) -> float:
    """Maximum slide the deck above can absorb, limited by the lower
    vehicle's contour: max(0, l*phi + h - X) with X the static clearance
    between the vehicle roof and the resting upper ramp."""
    if ramp.deck != "lower":
        raise DomainError(f"ramp {ramp.id}: lower allowance applies to lower-deck ramps")
    if angle < 0 or angle > ramp.max_slide_angle + 1e-12:
        raise DomainError(
            f"ramp {ramp.id}: slide angle {angle} exceeds cap {ramp.max_slide_angle}"
        )
    lift = 0.0 if slide == "none" else _lever(ramp, slide) * angle
    clearance = deck_gap - vehicle_height
    return max(0.0, lift + vehicle_height - clearance)


def effective_length(length: float, angle: float) -> float:
    """Chord projection of a vehicle on a ramp inclined at `angle`."""
    return length * math.cos(angle)


@lru_cache(maxsize=None)
def _physics_cached(
    carrier: CarrierType,
    footprint: tuple[int, ...],
    weight: float,
    height: float,
    length: float,
    slide: str,
    angle: float,
) -> ConfigPhysics:
    geom = footprint_geometry(carrier, footprint)
    inf = influence_at(carrier, geom.center_offset)
    ws, wd, wt = config_weights(weight, inf)
    gain = None
    allow = None
    if geom.deck == "upper":
        gain = height_gain(geom, slide, angle)
    else:
        allow = lower_allowance(geom, slide, angle, height, carrier.deck_gap)
    return ConfigPhysics(
        w_steer=ws,
        w_drive=wd,
        w_tandem=wt,
        l_eff=effective_length(length, angle),
        h_gain=gain,
        h_allow=allow,
    )


def config_physics(
    carrier: CarrierType,
    footprint: tuple[int, ...],
    vehicle: Vehicle,
    slide: str,
    angle: float,
) -> ConfigPhysics:
    """Derived physics for one configuration; cached per (carrier, footprint,
    vehicle dimensions, slide, angle) since same-type vehicles share values."""
    return _physics_cached(
        carrier, footprint, vehicle.weight, vehicle.height, vehicle.length, slide, angle
    )
