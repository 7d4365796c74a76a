"""Great-circle primitives and the dealer-selection polygon.

Bearings are measured from geographic north, normalized to (-pi, pi];
distances are kilometers on a sphere of radius 6371 km.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .domain import Dealer, DomainError, GeoPoint

__all__ = [
    "EARTH_RADIUS_KM",
    "GeodesyError",
    "UndefinedBearingError",
    "DegenerateQueryError",
    "RouteQuery",
    "RoutePolygon",
    "bearing",
    "haversine",
    "destination_point",
    "build_polygon",
    "select_dealers",
    "point_in_polygon",
]

EARTH_RADIUS_KM = 6371.0


class GeodesyError(DomainError):
    pass


class UndefinedBearingError(GeodesyError):
    """Bearing between coincident or antipodal points."""


class DegenerateQueryError(GeodesyError):
    """Route query whose source and destination coincide."""


def _central_angle(a: GeoPoint, b: GeoPoint) -> float:
    sdlat = math.sin((b.lat - a.lat) / 2.0)
    sdlon = math.sin((b.lon - a.lon) / 2.0)
    h = sdlat * sdlat + sdlon * sdlon * math.cos(a.lat) * math.cos(b.lat)
    return 2.0 * math.asin(min(1.0, math.sqrt(h)))


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in kilometers."""
    return EARTH_RADIUS_KM * _central_angle(a, b)


def bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Initial bearing from a to b, radians from north in (-pi, pi]."""
    angle = _central_angle(a, b)
    if angle < 1e-12 or angle > math.pi - 1e-12:
        raise UndefinedBearingError(
            "bearing is undefined for coincident or antipodal points"
        )
    dlon = b.lon - a.lon
    y = math.sin(dlon) * math.cos(b.lat)
    x = math.cos(a.lat) * math.sin(b.lat) - math.sin(a.lat) * math.cos(b.lat) * math.cos(dlon)
    theta = math.atan2(y, x)
    if theta <= -math.pi:
        theta = math.pi
    return theta


def destination_point(origin: GeoPoint, theta: float, distance: float) -> GeoPoint:
    """Point reached from origin along initial bearing theta after
    `distance` kilometers."""
    if distance < 0:
        raise GeodesyError("distance must be nonnegative")
    if distance == 0.0:
        return origin
    delta = distance / EARTH_RADIUS_KM
    sin_lat = math.sin(origin.lat) * math.cos(delta) + math.cos(origin.lat) * math.sin(
        delta
    ) * math.cos(theta)
    lat = math.asin(max(-1.0, min(1.0, sin_lat)))
    lon = origin.lon + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(origin.lat),
        math.cos(delta) - math.sin(origin.lat) * sin_lat,
    )
    lon = math.remainder(lon, 2.0 * math.pi)
    if lon <= -math.pi:
        lon = math.pi
    return GeoPoint(lat, lon)


@dataclass(frozen=True)
class RouteQuery:
    source: GeoPoint
    destination: GeoPoint
    viewing_angle: float  # radians
    offset_km: float

    def __post_init__(self):
        if not 0.0 < self.viewing_angle < math.pi:
            raise DomainError(f"viewing angle {self.viewing_angle} outside (0, pi)")
        if self.offset_km < 0.0:
            raise DomainError("offset distance must be >= 0")


@dataclass(frozen=True)
class RoutePolygon:
    """Selection quadrilateral, vertices ordered source, L, C, R."""

    vertices: tuple[GeoPoint, GeoPoint, GeoPoint, GeoPoint]

    def __post_init__(self):
        pts = self.vertices
        for i in range(4):
            for j in range(i + 1, 4):
                if pts[i] == pts[j]:
                    raise DomainError("polygon vertices must be pairwise distinct")


def build_polygon(q: RouteQuery) -> RoutePolygon:
    """Three extreme points at bearings theta, theta +/- phi/2 from the
    source; the center point carries the offset distance."""
    try:
        theta = bearing(q.source, q.destination)
    except UndefinedBearingError as exc:
        raise DegenerateQueryError("source and destination coincide") from exc
    di = haversine(q.source, q.destination)
    center = destination_point(q.source, theta, di + q.offset_km)
    left = destination_point(q.source, theta + q.viewing_angle / 2.0, di)
    right = destination_point(q.source, theta - q.viewing_angle / 2.0, di)
    return RoutePolygon(vertices=(q.source, left, center, right))


def _project(center: GeoPoint, p: GeoPoint) -> tuple[float, float]:
    # azimuthal equidistant chart centered on the polygon source; region
    # spans are small relative to Earth so the distortion is negligible
    d = haversine(center, p)
    if d < 1e-9:
        return 0.0, 0.0
    th = bearing(center, p)
    return d * math.sin(th), d * math.cos(th)


def point_in_polygon(polygon: RoutePolygon, p: GeoPoint, boundary_tol: float = 1e-9) -> bool:
    """Winding-number test on the local projection; boundary counts inside."""
    anchor = polygon.vertices[0]
    poly = [_project(anchor, v) for v in polygon.vertices]
    x, y = _project(anchor, p)

    scale = max(1.0, max(abs(c) for pt in poly for c in pt))
    eps = boundary_tol * scale

    winding = 0
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        # on-segment check
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        seg2 = (x2 - x1) ** 2 + (y2 - y1) ** 2
        if seg2 > 0:
            t = ((x - x1) * (x2 - x1) + (y - y1) * (y2 - y1)) / seg2
            if -eps <= t <= 1 + eps and abs(cross) / math.sqrt(seg2) <= eps:
                return True
        if y1 <= y:
            if y2 > y and cross > 0:
                winding += 1
        else:
            if y2 <= y and cross < 0:
                winding -= 1
    return winding != 0


def select_dealers(polygon: RoutePolygon, dealers) -> set[str]:
    """Ids of the dealers whose locations fall inside (or on) the polygon."""
    return {d.id for d in dealers if point_in_polygon(polygon, d.location)}
