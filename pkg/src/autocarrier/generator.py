"""Test-instance generation: the 28-type vehicle catalog, the stock nine-ramp
carrier, and the class A / class B generators."""

from __future__ import annotations

import json
import math
from importlib import resources

import numpy as np

from .domain import (
    CarrierType,
    Dealer,
    DomainError,
    GeoPoint,
    Instance,
    Vehicle,
    carrier_from_doc,
    validate_instance,
)

__all__ = [
    "TABLE2_COUNTS",
    "load_catalog",
    "default_carrier",
    "generate_instance",
    "make_random_instance",
]

# body-class counts (truck, sedan, hatchback) per fleet size
TABLE2_COUNTS = {
    100: (33, 31, 36),
    200: (80, 73, 47),
    400: (251, 70, 79),
    600: (261, 222, 117),
}

CLASS_DEALERS = {"A": (15, 20, 25), "B": (5, 7, 10)}

# ALC distribution center used for generated instances
DEPOT_LAT_DEG = 29.7604
DEPOT_LON_DEG = -95.3698

# class A spreads dealers over a wide region, class B models city loads
BOX_HALF_WIDTH_DEG = {"A": 1.5, "B": 0.35}


def load_catalog() -> list[dict]:
    """The shipped catalog of 28 vehicle types."""
    text = resources.files("autocarrier.data").joinpath("vehicle_catalog.json").read_text()
    return json.loads(text)["types"]


def default_carrier(v_max: int = 0, fleet_cap: int | None = None) -> CarrierType:
    """The stock nine-ramp carrier type."""
    text = resources.files("autocarrier.data").joinpath("carrier_nine_ramp.json").read_text()
    doc = json.loads(text)
    doc["v_max"] = v_max
    if fleet_cap is not None:
        doc["fleet_cap"] = fleet_cap
    return carrier_from_doc(doc)


def _roundtrip_degrees(rng: np.random.Generator, lo: float, hi: float) -> float:
    # degree values are rejection-sampled so that deg -> rad -> deg is exact,
    # keeping instance documents bit-stable across load/save cycles
    while True:
        d = round(float(rng.uniform(lo, hi)), 6)
        if math.degrees(math.radians(d)) == d:
            return d


def _sample_dealers(rng: np.random.Generator, n: int, half_width: float) -> list[Dealer]:
    dealers = []
    for k in range(n):
        lat = _roundtrip_degrees(
            rng, DEPOT_LAT_DEG - half_width, DEPOT_LAT_DEG + half_width
        )
        lon = _roundtrip_degrees(
            rng, DEPOT_LON_DEG - half_width, DEPOT_LON_DEG + half_width
        )
        dealers.append(
            Dealer(id=f"D{k + 1:02d}", location=GeoPoint(math.radians(lat), math.radians(lon)))
        )
    return dealers


def _sample_vehicles(
    rng: np.random.Generator,
    counts: tuple[int, int, int],
    dealers: list[Dealer],
) -> list[Vehicle]:
    catalog = load_catalog()
    by_class = {
        cls: [t for t in catalog if t["body_class"] == cls]
        for cls in ("truck", "sedan", "hatchback")
    }
    vehicles: list[Vehicle] = []
    serial = 0
    for cls, count in zip(("truck", "sedan", "hatchback"), counts):
        types = by_class[cls]
        # guarantee every catalog type appears, then fill uniformly
        picks = list(range(len(types)))[: min(count, len(types))]
        while len(picks) < count:
            picks.append(int(rng.integers(len(types))))
        for idx in picks:
            t = types[idx]
            serial += 1
            dealer = dealers[int(rng.integers(len(dealers)))]
            vehicles.append(
                Vehicle(
                    id=f"V{serial:04d}",
                    type_name=t["name"],
                    body_class=cls,
                    length=float(t["length"]),
                    height=float(t["height"]),
                    width=float(t["width"]),
                    weight=float(t["weight"]),
                    wheelbase=float(t["wheelbase"]),
                    dealer_id=dealer.id,
                )
            )
    return vehicles


def generate_instance(
    instance_class: str,
    n_vehicles: int,
    n_dealers: int,
    seed: int,
    *,
    v_max: int = 0,
    penalty_factor: float = 1000.0,
) -> Instance:
    """Generate a class A (low-demand, many dealers) or class B (city)
    instance with the catalog body-class distribution for the fleet size."""
    if instance_class not in CLASS_DEALERS:
        raise DomainError(f"unknown instance class {instance_class!r}")
    if n_dealers not in CLASS_DEALERS[instance_class]:
        raise DomainError(
            f"class {instance_class} supports n_dealers in {CLASS_DEALERS[instance_class]}, got {n_dealers}"
        )
    if n_vehicles not in TABLE2_COUNTS:
        raise DomainError(
            f"n_vehicles must be one of {sorted(TABLE2_COUNTS)}, got {n_vehicles}"
        )
    rng = np.random.default_rng(seed)
    carrier = default_carrier(v_max=v_max)
    dealers = _sample_dealers(rng, n_dealers, BOX_HALF_WIDTH_DEG[instance_class])
    vehicles = _sample_vehicles(rng, TABLE2_COUNTS[n_vehicles], dealers)
    instance = Instance(
        carriers=(carrier,),
        vehicles=tuple(vehicles),
        dealers=tuple(dealers),
        source=GeoPoint(math.radians(DEPOT_LAT_DEG), math.radians(DEPOT_LON_DEG)),
        penalty=penalty_factor * carrier.operating_cost,
        exclusions=frozenset(),
    )
    validate_instance(instance)
    return instance


def make_random_instance(
    n_vehicles: int,
    n_dealers: int,
    seed: int,
    *,
    v_max: int = 0,
    half_width_deg: float = 1.5,
    proportions: tuple[float, float, float] = (0.33, 0.31, 0.36),
    penalty_factor: float = 1000.0,
    fleet_cap: int | None = None,
) -> Instance:
    """Free-size companion to generate_instance for corpora that need fleet
    sizes outside the catalog table (body classes drawn by proportion)."""
    rng = np.random.default_rng(seed)
    counts = [int(round(n_vehicles * p)) for p in proportions]
    counts[2] = n_vehicles - counts[0] - counts[1]
    carrier = default_carrier(v_max=v_max, fleet_cap=fleet_cap)
    dealers = _sample_dealers(rng, n_dealers, half_width_deg)
    vehicles = _sample_vehicles(rng, tuple(counts), dealers)
    # re-id vehicles in a shuffled order so body classes interleave
    order = rng.permutation(len(vehicles))
    shuffled = tuple(
        Vehicle(
            id=f"V{k + 1:04d}",
            type_name=vehicles[i].type_name,
            body_class=vehicles[i].body_class,
            length=vehicles[i].length,
            height=vehicles[i].height,
            width=vehicles[i].width,
            weight=vehicles[i].weight,
            wheelbase=vehicles[i].wheelbase,
            dealer_id=vehicles[i].dealer_id,
        )
        for k, i in enumerate(order)
    )
    instance = Instance(
        carriers=(carrier,),
        vehicles=shuffled,
        dealers=tuple(dealers),
        source=GeoPoint(math.radians(DEPOT_LAT_DEG), math.radians(DEPOT_LON_DEG)),
        penalty=penalty_factor * carrier.operating_cost,
        exclusions=frozenset(),
    )
    validate_instance(instance)
    return instance
