"""Core domain records, instance file format, and validation.

Angles are radians and coordinates are (lat, lon) radian pairs everywhere in
memory; instance documents store angles and coordinates in decimal degrees.
Lengths are inches, weights pounds, geographic distances kilometers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import IO, Iterable

__all__ = [
    "DomainError",
    "SchemaError",
    "IntegrityError",
    "GeoPoint",
    "Dealer",
    "Vehicle",
    "Ramp",
    "LengthSet",
    "AxleGeometry",
    "CarrierLimits",
    "CarrierType",
    "Instance",
    "load_instance",
    "save_instance",
    "validate_instance",
]

BODY_CLASSES = ("truck", "sedan", "hatchback")


class DomainError(ValueError):
    """Base class for domain-rule violations."""


class SchemaError(DomainError):
    """Instance document does not conform to the schema; names the field."""


class IntegrityError(DomainError):
    """A reference inside an instance does not resolve."""


@dataclass(frozen=True)
class GeoPoint:
    """A point on the sphere, latitude/longitude in radians."""

    lat: float
    lon: float

    def __post_init__(self):
        if not -math.pi / 2 <= self.lat <= math.pi / 2:
            raise DomainError(f"latitude {self.lat} outside [-pi/2, pi/2]")
        if not -math.pi < self.lon <= math.pi:
            raise DomainError(f"longitude {self.lon} outside (-pi, pi]")


@dataclass
class Dealer:
    """A delivery destination; `order` is its position in the route sequence
    and is populated by routing."""

    id: str
    location: GeoPoint
    order: int | None = None


@dataclass(frozen=True)
class Vehicle:
    id: str
    type_name: str
    body_class: str
    length: float
    height: float
    width: float
    weight: float
    wheelbase: float
    dealer_id: str
    revenue: float = 0.0

    def __post_init__(self):
        for name in ("length", "height", "width", "weight", "wheelbase"):
            if getattr(self, name) <= 0:
                raise DomainError(f"vehicle {self.id}: {name} must be positive")
        if self.wheelbase >= self.length:
            raise DomainError(f"vehicle {self.id}: wheelbase must be < length")
        if self.body_class not in BODY_CLASSES:
            raise DomainError(f"vehicle {self.id}: unknown body class {self.body_class!r}")


@dataclass(frozen=True)
class Ramp:
    """One loading platform.

    `center_offset` is the signed arm of the ramp's geometric center measured
    from the drive axle (forward positive, from CAD).  `pivot_offsets` are the
    signed (front, rear) pivot positions relative to the ramp center.
    """

    id: int
    deck: str
    base_length: float
    center_offset: float
    pivot_offsets: tuple[float, float]
    max_slide_angle: float
    lower_partner: int | None = None

    def __post_init__(self):
        if self.deck not in ("upper", "lower"):
            raise DomainError(f"ramp {self.id}: deck must be 'upper' or 'lower'")
        # lower_partner only makes sense on upper-deck ramps; cab ramps with a
        # single-ramp height set legitimately have none
        if self.deck == "lower" and self.lower_partner is not None:
            raise DomainError(f"ramp {self.id}: lower ramp cannot have a lower partner")
        if self.max_slide_angle < 0:
            raise DomainError(f"ramp {self.id}: max slide angle must be >= 0")


@dataclass(frozen=True)
class LengthSet:
    ramps: tuple[int, ...]
    max_length: float


@dataclass(frozen=True)
class AxleGeometry:
    """Lever arms from the carrier CAD drawing, inches.

    l1 is the steer-axle arm ahead of the drive axle; l4+l5+l6 locates the
    tandem axle behind it; kingpin_offset is the signed position of the
    tractor/trailer coupling, measured like ramp centers from the drive axle.
    """

    l1: float
    l2: float
    l3: float
    l4: float
    l5: float
    l6: float
    l7: float
    kingpin_offset: float

    @property
    def steer_position(self) -> float:
        return self.l1

    @property
    def drive_position(self) -> float:
        return 0.0

    @property
    def tandem_position(self) -> float:
        return -(self.l4 + self.l5 + self.l6)


@dataclass(frozen=True)
class CarrierLimits:
    h_max: float
    w_steer_max: float
    w_drive_max: float
    w_tandem_max: float
    w_total_max: float


@dataclass(frozen=True)
class CarrierType:
    id: str
    ramps: tuple[Ramp, ...]
    height_sets: tuple[tuple[int, ...], ...]
    length_sets: tuple[LengthSet, ...]
    split_ramps: tuple[tuple[int, ...], ...]
    unload_edges: tuple[tuple[int, int], ...]
    axle: AxleGeometry
    limits: CarrierLimits
    operating_cost: float
    fleet_cap: int
    v_max: int
    deck_gap: float

    def __post_init__(self):
        _check_carrier(self)

    def ramp(self, ramp_id: int) -> Ramp:
        return self._ramp_index[ramp_id]

    @property
    def _ramp_index(self) -> dict[int, Ramp]:
        idx = self.__dict__.get("_ramp_cache")
        if idx is None:
            idx = {r.id: r for r in self.ramps}
            object.__setattr__(self, "_ramp_cache", idx)
        return idx

    @property
    def upper_ramps(self) -> tuple[int, ...]:
        return tuple(r.id for r in self.ramps if r.deck == "upper")

    @property
    def lower_ramps(self) -> tuple[int, ...]:
        return tuple(r.id for r in self.ramps if r.deck == "lower")

    @property
    def exit_ramp(self) -> int:
        out = {r.id for r in self.ramps} - {a for a, _ in self.unload_edges}
        return next(iter(out))

    def unload_sequence(self, ramp_id: int) -> tuple[int, ...]:
        """Ordered ramps that must be emptied before unloading `ramp_id`."""
        step = dict(self.unload_edges)
        seq = []
        cur = ramp_id
        while cur in step:
            cur = step[cur]
            seq.append(cur)
        return tuple(seq)

    def footprints(self) -> tuple[tuple[int, ...], ...]:
        """All assignable ramp entities: single ramps then split sets."""
        return tuple((r.id,) for r in self.ramps) + self.split_ramps


def _check_carrier(c: CarrierType) -> None:
    ids = [r.id for r in c.ramps]
    if len(ids) != len(set(ids)):
        raise DomainError(f"carrier {c.id}: duplicate ramp ids")
    known = set(ids)
    upper = {r.id for r in c.ramps if r.deck == "upper"}
    lower = known - upper

    # unload graph: single exit, every other ramp exactly one out edge,
    # acyclic so the path from any ramp to the exit is unique
    out: dict[int, int] = {}
    for a, b in c.unload_edges:
        if a not in known or b not in known:
            raise DomainError(f"carrier {c.id}: unload edge ({a},{b}) names unknown ramp")
        if a in out:
            raise DomainError(f"carrier {c.id}: ramp {a} has multiple unload successors")
        out[a] = b
    exits = known - set(out)
    if len(exits) != 1:
        raise DomainError(f"carrier {c.id}: unload graph must have exactly one exit ramp")
    for start in known:
        seen = set()
        cur = start
        while cur in out:
            if cur in seen:
                raise DomainError(f"carrier {c.id}: unload graph has a cycle at ramp {cur}")
            seen.add(cur)
            cur = out[cur]

    for hs in c.height_sets:
        if len([i for i in hs if i in upper]) > 1 or len([i for i in hs if i in lower]) > 1:
            raise DomainError(
                f"carrier {c.id}: height set {hs} has more than one ramp per deck"
            )
        for i in hs:
            if i not in known:
                raise DomainError(f"carrier {c.id}: height set names unknown ramp {i}")

    for sp in c.split_ramps:
        if len(sp) < 2:
            raise DomainError(f"carrier {c.id}: split ramp set {sp} needs >= 2 ramps")
        if any(i not in known for i in sp):
            raise DomainError(f"carrier {c.id}: split set {sp} names unknown ramp")
        offs = sorted(c.ramp(i).center_offset for i in sp)
        # adjacency: member ramps must be consecutive on their deck
        decks = {c.ramp(i).deck for i in sp}
        if len(decks) != 1:
            raise DomainError(f"carrier {c.id}: split set {sp} mixes decks")
        deck = next(iter(decks))
        deck_offs = sorted(r.center_offset for r in c.ramps if r.deck == deck)
        lo, hi = offs[0], offs[-1]
        between = [o for o in deck_offs if lo < o < hi]
        if any(o not in offs for o in between):
            raise DomainError(f"carrier {c.id}: split set {sp} is not adjacent")

    for ramp in c.ramps:
        if ramp.lower_partner is not None and ramp.lower_partner not in known:
            raise DomainError(
                f"carrier {c.id}: ramp {ramp.id} lower partner {ramp.lower_partner} unknown"
            )
    if c.fleet_cap <= 0:
        raise DomainError(f"carrier {c.id}: fleet cap must be positive")
    if c.v_max < 0:
        raise DomainError(f"carrier {c.id}: v_max must be >= 0")


@dataclass(frozen=True)
class Instance:
    carriers: tuple[CarrierType, ...]
    vehicles: tuple[Vehicle, ...]
    dealers: tuple[Dealer, ...]
    source: GeoPoint
    penalty: float
    exclusions: frozenset[tuple[str, int, str]] = frozenset()

    def dealer(self, dealer_id: str) -> Dealer:
        for d in self.dealers:
            if d.id == dealer_id:
                return d
        raise IntegrityError(f"unknown dealer {dealer_id!r}")

    def carrier(self, type_id: str) -> CarrierType:
        for t in self.carriers:
            if t.id == type_id:
                return t
        raise IntegrityError(f"unknown carrier type {type_id!r}")

    def with_v_max(self, v_max: int) -> "Instance":
        """Copy of the instance with every carrier type's reload cap replaced."""
        return replace(
            self, carriers=tuple(replace(t, v_max=v_max) for t in self.carriers)
        )


def validate_instance(instance: Instance) -> None:
    """Single reusable integrity check used by all downstream modules."""
    dealer_ids = [d.id for d in instance.dealers]
    if len(dealer_ids) != len(set(dealer_ids)):
        raise IntegrityError("duplicate dealer ids")
    vehicle_ids = [v.id for v in instance.vehicles]
    if len(vehicle_ids) != len(set(vehicle_ids)):
        raise IntegrityError("duplicate vehicle ids")
    known_dealers = set(dealer_ids)
    for v in instance.vehicles:
        if v.dealer_id not in known_dealers:
            raise IntegrityError(f"vehicle {v.id} references unknown dealer {v.dealer_id!r}")
    orders = [d.order for d in instance.dealers if d.order is not None]
    if orders and sorted(orders) != list(range(len(instance.dealers))):
        raise IntegrityError("dealer order values are not a permutation of 0..n-1")
    max_cost = max((t.operating_cost for t in instance.carriers), default=0.0)
    if instance.carriers and instance.penalty <= max_cost:
        raise IntegrityError(
            f"penalty {instance.penalty} must exceed every carrier operating cost"
        )
    known_types = {t.id for t in instance.carriers}
    for type_id, ramp_id, _ in instance.exclusions:
        if type_id not in known_types:
            raise IntegrityError(f"exclusion references unknown carrier type {type_id!r}")
        if ramp_id not in {r.id for r in instance.carrier(type_id).ramps}:
            raise IntegrityError(
                f"exclusion references unknown ramp {ramp_id} of type {type_id!r}"
            )


# ---------------------------------------------------------------------------
# document I/O
#
# Degrees are the file unit for angles and coordinates.  To keep
# load(save(x)) == x bit-exact, the emitted degree value is searched among
# the closest floats so that converting back to radians reproduces the
# in-memory value exactly.

_DEG = math.pi / 180.0


def _exact_degrees(rad: float) -> float:
    deg = math.degrees(rad)
    if deg * _DEG == rad:
        return deg
    for _ in range(4):
        up = math.nextafter(deg, math.inf)
        if up * _DEG == rad:
            return up
        down = math.nextafter(deg, -math.inf)
        if down * _DEG == rad:
            return down
        deg = up if abs(up * _DEG - rad) < abs(down * _DEG - rad) else down
    return math.degrees(rad)


def _point_to_doc(p: GeoPoint) -> dict:
    return {"lat": _exact_degrees(p.lat), "lon": _exact_degrees(p.lon)}


def _point_from_doc(doc: dict, where: str) -> GeoPoint:
    try:
        return GeoPoint(math.radians(doc["lat"]), math.radians(doc["lon"]))
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{where}: expected lat/lon degrees") from exc


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    return doc[key]


def save_instance(instance: Instance, fp: IO[str] | None = None) -> str:
    doc = {
        "schema": 1,
        "source": _point_to_doc(instance.source),
        "penalty": instance.penalty,
        "carriers": [_carrier_to_doc(t) for t in instance.carriers],
        "vehicles": [
            {
                "id": v.id,
                "type_name": v.type_name,
                "body_class": v.body_class,
                "length": v.length,
                "height": v.height,
                "width": v.width,
                "weight": v.weight,
                "wheelbase": v.wheelbase,
                "dealer_id": v.dealer_id,
                "revenue": v.revenue,
            }
            for v in instance.vehicles
        ],
        "dealers": [
            {"id": d.id, **_point_to_doc(d.location), "order": d.order}
            for d in instance.dealers
        ],
        "exclusions": [list(e) for e in sorted(instance.exclusions)],
    }
    text = json.dumps(doc, indent=1)
    if fp is not None:
        fp.write(text)
    return text


def _carrier_to_doc(t: CarrierType) -> dict:
    return {
        "id": t.id,
        "operating_cost": t.operating_cost,
        "fleet_cap": t.fleet_cap,
        "v_max": t.v_max,
        "deck_gap": t.deck_gap,
        "ramps": [
            {
                "id": r.id,
                "deck": r.deck,
                "base_length": r.base_length,
                "center_offset": r.center_offset,
                "pivot_offsets": list(r.pivot_offsets),
                "max_slide_angle_deg": _exact_degrees(r.max_slide_angle),
                "lower_partner": r.lower_partner,
            }
            for r in t.ramps
        ],
        "height_sets": [list(h) for h in t.height_sets],
        "length_sets": [
            {"ramps": list(ls.ramps), "max_length": ls.max_length} for ls in t.length_sets
        ],
        "split_ramps": [list(s) for s in t.split_ramps],
        "unload_edges": [list(e) for e in t.unload_edges],
        "axle_geometry": {
            "l1": t.axle.l1,
            "l2": t.axle.l2,
            "l3": t.axle.l3,
            "l4": t.axle.l4,
            "l5": t.axle.l5,
            "l6": t.axle.l6,
            "l7": t.axle.l7,
            "kingpin_offset": t.axle.kingpin_offset,
        },
        "limits": {
            "h_max": t.limits.h_max,
            "w_steer_max": t.limits.w_steer_max,
            "w_drive_max": t.limits.w_drive_max,
            "w_tandem_max": t.limits.w_tandem_max,
            "w_total_max": t.limits.w_total_max,
        },
    }


def carrier_from_doc(doc: dict) -> CarrierType:
    where = f"carrier {doc.get('id', '?')}"
    try:
        ramps = tuple(
            Ramp(
                id=r["id"],
                deck=r["deck"],
                base_length=r["base_length"],
                center_offset=r["center_offset"],
                pivot_offsets=tuple(r["pivot_offsets"]),
                max_slide_angle=math.radians(r["max_slide_angle_deg"]),
                lower_partner=r.get("lower_partner"),
            )
            for r in _require(doc, "ramps", where)
        )
        axle_doc = _require(doc, "axle_geometry", where)
        limits_doc = _require(doc, "limits", where)
        return CarrierType(
            id=_require(doc, "id", where),
            ramps=ramps,
            height_sets=tuple(tuple(h) for h in _require(doc, "height_sets", where)),
            length_sets=tuple(
                LengthSet(tuple(ls["ramps"]), ls["max_length"])
                for ls in _require(doc, "length_sets", where)
            ),
            split_ramps=tuple(tuple(s) for s in _require(doc, "split_ramps", where)),
            unload_edges=tuple(tuple(e) for e in _require(doc, "unload_edges", where)),
            axle=AxleGeometry(
                l1=axle_doc["l1"],
                l2=axle_doc["l2"],
                l3=axle_doc["l3"],
                l4=axle_doc["l4"],
                l5=axle_doc["l5"],
                l6=axle_doc["l6"],
                l7=axle_doc["l7"],
                kingpin_offset=axle_doc["kingpin_offset"],
            ),
            limits=CarrierLimits(
                h_max=limits_doc["h_max"],
                w_steer_max=limits_doc["w_steer_max"],
                w_drive_max=limits_doc["w_drive_max"],
                w_tandem_max=limits_doc["w_tandem_max"],
                w_total_max=limits_doc["w_total_max"],
            ),
            operating_cost=_require(doc, "operating_cost", where),
            fleet_cap=_require(doc, "fleet_cap", where),
            v_max=_require(doc, "v_max", where),
            deck_gap=_require(doc, "deck_gap", where),
        )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{where}: malformed field ({exc})") from exc


def load_instance(document: str | bytes | IO) -> Instance:
    if hasattr(document, "read"):
        document = document.read()
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("document root must be an object")
    if _require(doc, "schema", "document") != 1:
        raise SchemaError(f"unsupported schema version {doc['schema']!r}")

    carriers = tuple(carrier_from_doc(c) for c in _require(doc, "carriers", "document"))
    vehicles = []
    for v in _require(doc, "vehicles", "document"):
        where = f"vehicle {v.get('id', '?')}"
        try:
            vehicles.append(
                Vehicle(
                    id=v["id"],
                    type_name=v["type_name"],
                    body_class=v["body_class"],
                    length=v["length"],
                    height=v["height"],
                    width=v["width"],
                    weight=v["weight"],
                    wheelbase=v["wheelbase"],
                    dealer_id=v["dealer_id"],
                    revenue=v.get("revenue", 0.0),
                )
            )
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"{where}: malformed field ({exc})") from exc
    dealers = []
    for d in _require(doc, "dealers", "document"):
        where = f"dealer {d.get('id', '?')}"
        dealers.append(
            Dealer(
                id=_require(d, "id", where),
                location=_point_from_doc(d, where),
                order=d.get("order"),
            )
        )
    exclusions = frozenset(
        (e[0], e[1], e[2]) for e in doc.get("exclusions", [])
    )
    instance = Instance(
        carriers=carriers,
        vehicles=tuple(vehicles),
        dealers=tuple(dealers),
        source=_point_from_doc(_require(doc, "source", "document"), "source"),
        penalty=_require(doc, "penalty", "document"),
        exclusions=exclusions,
    )
    validate_instance(instance)
    return instance
