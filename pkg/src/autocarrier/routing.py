"""Delivery sequencing (open Hamiltonian path, Lin-Kernighan style moves)
and the percentage-of-perfect-load metric."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .domain import CarrierType, Dealer, DomainError, GeoPoint
from .geodesy import EARTH_RADIUS_KM, haversine

__all__ = ["RouteSequence", "UndefinedMetricError", "sequence_route", "depot_distances", "ppl"]

log = logging.getLogger(__name__)

DEFAULT_RESTARTS = 8
DEFAULT_KICKS = 15


class UndefinedMetricError(DomainError):
    """PPL is undefined when the route has zero length."""


@dataclass(frozen=True)
class RouteSequence:
    """Dealer visit order and the total length rm of the route from the
    distribution center through the last stop."""

    dealer_ids: tuple[str, ...]
    total_km: float

    def order_of(self, dealer_id: str) -> int:
        return self.dealer_ids.index(dealer_id)


def _path_length(path: np.ndarray, D: np.ndarray) -> float:
    return float(sum(D[path[k], path[k + 1]] for k in range(len(path) - 1)))


def _nearest_neighbour(D: np.ndarray, free: list[int], dest: int) -> list[int]:
    order = []
    cur = 0
    remaining = set(free)
    while remaining:
        nxt = min(remaining, key=lambda j: (D[cur, j], j))
        order.append(nxt)
        remaining.discard(nxt)
        cur = nxt
    return [0] + order + [dest]


def _double_bridge(path: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    # 4-opt kick: reorder internal segments A C B D; endpoints stay fixed
    n = len(path)
    if n < 6:
        mid = path[1:-1].copy()
        rng.shuffle(mid)
        return np.concatenate(([path[0]], mid, [path[-1]]))
    cuts = np.sort(rng.choice(np.arange(1, n - 1), size=3, replace=False))
    p1, p2, p3 = int(cuts[0]), int(cuts[1]), int(cuts[2])
    return np.concatenate((path[:p1], path[p2:p3], path[p1:p2], path[p3:]))


def sequence_route(
    dc: GeoPoint,
    destination: Dealer,
    selected: list[Dealer],
    restarts: int = DEFAULT_RESTARTS,
    kicks: int = DEFAULT_KICKS,
) -> RouteSequence:
    """Open Hamiltonian path over the selected dealers, starting the mileage
    at the distribution center and ending at the destination dealer.

    Chained local search: multi-restart 2-opt / Or-opt / 3-opt descent with
    double-bridge kicks, merged on (length, lexicographic dealer-id sequence)
    so runs are deterministic; each dealer's `order` field is populated with
    its position."""
    if destination.id not in {d.id for d in selected}:
        raise DomainError("destination dealer must be part of the selected set")
    dealers = sorted(selected, key=lambda d: d.id)
    ids = [d.id for d in dealers]
    dest_node = ids.index(destination.id) + 1

    lat = np.array([dc.lat] + [d.location.lat for d in dealers])
    lon = np.array([dc.lon] + [d.location.lon for d in dealers])
    D = kernels.haversine_matrix(lat, lon, EARTH_RADIUS_KM)

    n = len(dealers)
    free = [j for j in range(1, n + 1) if j != dest_node]

    best_path: np.ndarray | None = None
    best_key: tuple[float, tuple[str, ...]] | None = None
    for restart in range(max(1, restarts)):
        rng = np.random.default_rng(restart)
        if restart == 0:
            path = np.array(_nearest_neighbour(D, free, dest_node), dtype=np.int64)
        else:
            mid = np.array(free, dtype=np.int64)
            rng.shuffle(mid)
            path = np.concatenate(([0], mid, [dest_node])).astype(np.int64)
        while kernels.lk_pass(path, D):
            pass
        length = _path_length(path, D)
        if n >= 4:
            for _ in range(max(0, kicks)):
                trial = _double_bridge(path, rng)
                while kernels.lk_pass(trial, D):
                    pass
                trial_length = _path_length(trial, D)
                if trial_length < length - 1e-12:
                    path, length = trial, trial_length
        key = (round(length, 12), tuple(ids[j - 1] for j in path[1:]))
        if best_key is None or key < best_key:
            best_key = key
            best_path = path.copy()

    sequence = tuple(ids[j - 1] for j in best_path[1:])
    total = _path_length(best_path, D)
    by_id = {d.id: d for d in dealers}
    for pos, dealer_id in enumerate(sequence):
        by_id[dealer_id].order = pos
    return RouteSequence(dealer_ids=sequence, total_km=total)


def depot_distances(dc: GeoPoint, dealers) -> dict[str, float]:
    """Great-circle distance from the distribution center to each dealer."""
    return {d.id: haversine(dc, d.location) for d in dealers}


def ppl(
    sequence: RouteSequence,
    deliveries: dict[str, int],
    carrier: CarrierType,
    depot_km: dict[str, float],
) -> float:
    """Tariff miles over optimum pay miles.

    Tariff miles weight each dealer's depot distance by its delivery count;
    optimum pay miles are the route length times the ramp count."""
    rm = sequence.total_km
    if rm <= 0.0:
        raise UndefinedMetricError("route length is zero; PPL undefined")
    ramps = len(carrier.ramps)
    tariff = sum(depot_km[s] * n for s, n in deliveries.items())
    value = tariff / (rm * ramps)
    if value > 1.0:
        log.warning("PPL %.4f exceeds 1; tariff distances exceed route mileage", value)
    return value
