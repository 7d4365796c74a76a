"""Restricted master problem over the generated column pool: carrier-count
capacity rows, vehicle coverage rows with penalty fallbacks, dual extraction
for pricing, and integral-solution detection."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .domain import Instance
from .mip import LinearModel, SolveResult, solve_lp
from .pricing import DualPrices, Load, validate_load

__all__ = ["ColumnPool", "ColumnRef", "MasterSolution", "solve_rmp"]

log = logging.getLogger(__name__)

INT_TOL = 1e-6


@dataclass(frozen=True)
class ColumnRef:
    carrier_type: str
    index: int


class ColumnPool:
    """Per-type ordered column collections with stable indices and
    structural (vehicle set + configuration set) deduplication."""

    def __init__(self, type_ids):
        self.columns: dict[str, list[Load]] = {t: [] for t in type_ids}
        self._keys: dict[tuple, ColumnRef] = {}

    def add_column(self, load: Load, *, context=None) -> tuple[ColumnRef, bool]:
        """Returns (ref, added); a structural duplicate returns the existing
        ref without growing the pool.  `context` optionally carries
        (carrier, vehicles, route_order) to re-validate before admission."""
        if context is not None:
            carrier, vehicles, route_order = context
            problems = validate_load(load, carrier, vehicles, route_order)
            if problems:
                raise ValueError(f"rejected column: {problems}")
        key = load.column_key
        if key in self._keys:
            return self._keys[key], False
        ref = ColumnRef(load.carrier_type, len(self.columns[load.carrier_type]))
        self.columns[load.carrier_type].append(load)
        self._keys[key] = ref
        return ref, True

    def loads(self, type_id: str) -> list[Load]:
        return self.columns[type_id]

    def refs(self):
        for t, loads in self.columns.items():
            for i in range(len(loads)):
                yield ColumnRef(t, i)

    def __len__(self) -> int:
        return sum(len(v) for v in self.columns.values())


@dataclass
class MasterSolution:
    x: dict[ColumnRef, float]
    u: dict[str, float]
    objective: float
    duals: DualPrices
    integral: bool
    lp: SolveResult = field(repr=False, default=None)
    var_of: dict[ColumnRef, int] = field(repr=False, default_factory=dict)


def solve_rmp(
    pool: ColumnPool,
    instance: Instance,
    branch_bounds: dict[ColumnRef, tuple[float, float]] | None = None,
    warm: SolveResult | None = None,
) -> MasterSolution:
    """LP relaxation of the master over the current pool; penalty variables
    keep it feasible for any pool, so a solution always exists."""
    branch_bounds = branch_bounds or {}
    model = LinearModel("rmp", sense="min")
    var_of: dict[ColumnRef, int] = {}
    for ref in pool.refs():
        carrier = instance.carrier(ref.carrier_type)
        lo, hi = branch_bounds.get(ref, (0.0, 1.0))
        var_of[ref] = model.add_var(
            f"x_{ref.carrier_type}_{ref.index}", lo, hi, obj=carrier.operating_cost
        )
    u_of = {
        v.id: model.add_var(f"u_{v.id}", 0.0, 1.0, obj=instance.penalty)
        for v in instance.vehicles
    }
    cap_row: dict[str, int] = {}
    for t in instance.carriers:
        coeffs = {var_of[ColumnRef(t.id, i)]: 1.0 for i in range(len(pool.loads(t.id)))}
        if coeffs:
            cap_row[t.id] = model.add_constr(coeffs, "<=", float(t.fleet_cap), f"cap_{t.id}")
    cover_row: dict[str, int] = {}
    covering: dict[str, list[int]] = {v.id: [] for v in instance.vehicles}
    for ref in pool.refs():
        xj = var_of[ref]
        for vid in pool.loads(ref.carrier_type)[ref.index].vehicle_ids:
            covering[vid].append(xj)
    for v in instance.vehicles:
        coeffs = {xj: 1.0 for xj in covering[v.id]}
        coeffs[u_of[v.id]] = 1.0
        cover_row[v.id] = model.add_constr(coeffs, ">=", 1.0, f"cover_{v.id}")

    res = solve_lp(model, warm=warm)
    if res.status != "optimal":
        raise RuntimeError(f"master LP unexpectedly {res.status}")

    x = {ref: res.value(j) for ref, j in var_of.items()}
    u = {vid: res.value(j) for vid, j in u_of.items()}
    d_v = {vid: max(0.0, float(res.duals[r])) for vid, r in cover_row.items()}
    sigma = {t: min(0.0, float(res.duals[r])) for t, r in cap_row.items()}
    integral = all(abs(val - round(val)) <= INT_TOL for val in x.values())
    return MasterSolution(
        x=x,
        u=u,
        objective=res.objective,
        duals=DualPrices(vehicle=d_v, capacity=sigma),
        integral=integral,
        lp=res,
        var_of=var_of,
    )
