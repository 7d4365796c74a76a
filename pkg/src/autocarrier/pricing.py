"""The per-carrier-type pricing MILP: build, solve, decode to Load columns,
plus the independent feasibility validators and the unloading simulation.

Constraint families, in build order: stacked-height budgets with slide
relief, relief caps from the vehicle above and below, axle and total weight
budgets, deck length budgets, split-ramp exclusivity, assignment exclusivity,
and route-order reload (violation) accounting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .configs import Configuration
from .domain import CarrierType, Vehicle
from .mip import LinearModel, SolveResult, solve_milp

__all__ = [
    "DualPrices",
    "Load",
    "Pricer",
    "PricingError",
    "NEGATIVE_RC_TOL",
    "build_ldp",
    "price",
    "count_violations",
    "validate_load",
]

log = logging.getLogger(__name__)

NEGATIVE_RC_TOL = 1e-6
_EPS = 1e-6


class PricingError(RuntimeError):
    """A decoded load failed independent re-validation."""


@dataclass(frozen=True)
class DualPrices:
    """Vehicle coverage duals (nonnegative) and per-type capacity duals
    (nonpositive)."""

    vehicle: dict[str, float]
    capacity: dict[str, float]

    def profit(self, v: Vehicle) -> float:
        return self.vehicle.get(v.id, 0.0) + v.revenue


@dataclass(frozen=True)
class Load:
    """A priced column: one carrier trip with exact ramp assignments."""

    carrier_type: str
    configs: tuple[Configuration, ...]
    slide_reliefs: tuple[tuple[int, str, float], ...]
    violations: int
    reduced_cost: float

    @property
    def vehicle_ids(self) -> frozenset[str]:
        return frozenset(c.vehicle_id for c in self.configs)

    @property
    def column_key(self) -> tuple:
        return (
            self.carrier_type,
            self.vehicle_ids,
            frozenset(c.signature for c in self.configs),
        )


def _qset(carrier: CarrierType, footprint: tuple[int, ...]) -> frozenset[int]:
    """Ramps that must be emptied before the vehicle on `footprint` leaves."""
    blockers: set[int] = set()
    for r in footprint:
        blockers.update(carrier.unload_sequence(r))
    return frozenset(blockers - set(footprint))


def _stop_of(config: Configuration, vehicles: dict[str, Vehicle], route_order: dict[str, int]) -> int:
    return route_order[vehicles[config.vehicle_id].dealer_id]


def add_load_constraints(
    model: LinearModel,
    carrier: CarrierType,
    vehicles: dict[str, Vehicle],
    configs: list[Configuration],
    y: list[int],
    route_order: dict[str, int],
    tag: str = "",
    v_max: int | None = None,
) -> list[int]:
    """Families (heights, weights, lengths, splits, assignment, violations)
    over existing y variables; returns the violation-count variable indices
    so the caller can cap their sum.

    When `v_max` is 0 the reload machinery collapses to direct conflict rows
    (a last-in-first-out load admits no blocker bound for a later stop),
    which is the same feasible set with a far tighter relaxation."""
    limits = carrier.limits
    upper = set(carrier.upper_ramps)
    n_ramps = len(carrier.ramps)

    # relief variables per (upper ramp, slide), created only where a positive
    # gain cap exists; lower-partner variables follow on demand
    hvar: dict[tuple[int, str], int] = {}
    gain_caps: dict[tuple[int, str], list[tuple[int, float]]] = {}
    allow_caps: dict[tuple[int, str], list[tuple[int, float]]] = {}
    for k, cfg in enumerate(configs):
        if len(cfg.footprint) != 1 or cfg.slide == "none":
            continue
        ramp_id = cfg.footprint[0]
        if ramp_id in upper:
            if cfg.physics.h_gain and cfg.physics.h_gain > 0:
                gain_caps.setdefault((ramp_id, cfg.slide), []).append((y[k], cfg.physics.h_gain))
        else:
            if cfg.physics.h_allow and cfg.physics.h_allow > 0:
                allow_caps.setdefault((ramp_id, cfg.slide), []).append((y[k], cfg.physics.h_allow))

    for (ramp_id, slide), caps in sorted(gain_caps.items()):
        partner = carrier.ramp(ramp_id).lower_partner
        if partner is not None and (partner, slide) not in allow_caps:
            continue  # relief impossible: the deck below cannot absorb it
        hv = model.add_var(f"{tag}h_{ramp_id}_{slide}", 0.0, INF_GAIN)
        hvar[(ramp_id, slide)] = hv
        model.add_constr(
            {hv: 1.0, **{yk: -g for yk, g in caps}}, "<=", 0.0, f"{tag}gaincap_{ramp_id}_{slide}"
        )
        if partner is not None:
            pv = model.add_var(f"{tag}h_{partner}_{slide}", 0.0, INF_GAIN)
            model.add_constr(
                {hv: 1.0, pv: -1.0}, "<=", 0.0, f"{tag}pair_{ramp_id}_{slide}"
            )
            model.add_constr(
                {pv: 1.0, **{yk: -a for yk, a in allow_caps[(partner, slide)]}},
                "<=",
                0.0,
                f"{tag}allowcap_{partner}_{slide}",
            )

    # stacked height per height set, less any relief from its upper ramps
    for hs in carrier.height_sets:
        coeffs: dict[int, float] = {}
        for k, cfg in enumerate(configs):
            if set(cfg.footprint) & set(hs):
                coeffs[y[k]] = coeffs.get(y[k], 0.0) + vehicles[cfg.vehicle_id].height
        for ramp_id in hs:
            if ramp_id in upper:
                for slide in ("forward", "reverse"):
                    if (ramp_id, slide) in hvar:
                        coeffs[hvar[(ramp_id, slide)]] = -1.0
        if coeffs:
            model.add_constr(coeffs, "<=", limits.h_max, f"{tag}height_{'_'.join(map(str, hs))}")

    # axle and total weight budgets
    for attr, cap in (
        ("w_steer", limits.w_steer_max),
        ("w_drive", limits.w_drive_max),
        ("w_tandem", limits.w_tandem_max),
    ):
        coeffs = {}
        for k, cfg in enumerate(configs):
            w = getattr(cfg.physics, attr)
            if w != 0.0:
                coeffs[y[k]] = w
        if coeffs:
            model.add_constr(coeffs, "<=", cap, f"{tag}{attr}")
    coeffs = {y[k]: vehicles[cfg.vehicle_id].weight for k, cfg in enumerate(configs)}
    if coeffs:
        model.add_constr(coeffs, "<=", limits.w_total_max, f"{tag}w_total")

    # loaded length per deck section
    for ls in carrier.length_sets:
        coeffs = {}
        for k, cfg in enumerate(configs):
            if set(cfg.footprint) & set(ls.ramps):
                coeffs[y[k]] = cfg.physics.l_eff
        if coeffs:
            model.add_constr(coeffs, "<=", ls.max_length, f"{tag}length_{'_'.join(map(str, ls.ramps))}")

    # split-ramp exclusivity
    for sp in carrier.split_ramps:
        on_split = [y[k] for k, cfg in enumerate(configs) if cfg.footprint == sp]
        members = [
            y[k]
            for k, cfg in enumerate(configs)
            if len(cfg.footprint) == 1 and cfg.footprint[0] in sp
        ]
        if not on_split:
            continue
        # implied integer: forced to 0/1 by the rows once the y's are integral
        spv = model.add_var(f"{tag}sp_{'_'.join(map(str, sp))}", 0.0, 1.0)
        model.add_constr(
            {**{yk: 1.0 for yk in on_split}, spv: -1.0}, "<=", 0.0, f"{tag}split_use_{sp[0]}"
        )
        if members:
            coeffs = {yk: 1.0 for yk in members}
            coeffs[spv] = float(len(sp))
            model.add_constr(coeffs, "<=", float(len(sp)), f"{tag}split_excl_{sp[0]}")

    # one vehicle per physical ramp (covers split overlaps), one ramp per vehicle
    for ramp in carrier.ramps:
        coeffs = {y[k]: 1.0 for k, cfg in enumerate(configs) if ramp.id in cfg.footprint}
        if coeffs:
            model.add_constr(coeffs, "<=", 1.0, f"{tag}ramp_{ramp.id}")
    by_vehicle: dict[str, list[int]] = {}
    for k, cfg in enumerate(configs):
        by_vehicle.setdefault(cfg.vehicle_id, []).append(y[k])
    for vid, yks in sorted(by_vehicle.items()):
        model.add_constr({yk: 1.0 for yk in yks}, "<=", 1.0, f"{tag}vehicle_{vid}")

    # reload accounting against the route order and the unloading graph
    u_vars: list[int] = []
    qsets = {fp: _qset(carrier, fp) for fp in {cfg.footprint for cfg in configs}}
    pairs: dict[tuple[tuple[int, ...], int], list[int]] = {}
    for k, cfg in enumerate(configs):
        s = _stop_of(cfg, vehicles, route_order)
        pairs.setdefault((cfg.footprint, s), []).append(k)
    for (fp, s), keys in sorted(pairs.items()):
        qs = qsets[fp]
        if not qs:
            continue
        blockers = [
            y[k]
            for k, cfg in enumerate(configs)
            if cfg.footprint != fp
            and set(cfg.footprint) & qs
            and _stop_of(cfg, vehicles, route_order) > s
        ]
        if not blockers:
            continue
        if v_max == 0:
            # LIFO: a vehicle bound for this stop excludes every later-stop
            # vehicle on its unloading path (same feasible set as the u/z
            # accounting with the cap at zero, but a tight relaxation)
            for b, yb in enumerate(blockers):
                coeffs = {y[k]: 1.0 for k in keys}
                coeffs[yb] = coeffs.get(yb, 0.0) + 1.0
                model.add_constr(coeffs, "<=", 1.0, f"{tag}lifo_{fp[0]}_{s}_{b}")
            continue
        # z and u are implied integers as well: z is pinned by the assignment
        # sum, u by its blocker count row
        zv = model.add_var(f"{tag}z_{fp[0]}_{s}", 0.0, 1.0)
        model.add_constr(
            {**{y[k]: 1.0 for k in keys}, zv: -1.0}, "<=", 0.0, f"{tag}zdef_{fp[0]}_{s}"
        )
        uv = model.add_var(f"{tag}u_{fp[0]}_{s}", 0.0, float(n_ramps))
        coeffs = {yk: 1.0 for yk in blockers}
        coeffs[uv] = -1.0
        coeffs[zv] = float(n_ramps)
        model.add_constr(coeffs, "<=", float(n_ramps), f"{tag}viol_{fp[0]}_{s}")
        u_vars.append(uv)
    return u_vars


INF_GAIN = 1e6  # relief variables are capped by their rows, not bounds
INF_BOUND = 1e18
POOL_HARVEST = 8  # extra improving incumbents decoded as bonus columns


def add_vehicle_indicators(model: LinearModel, configs, y: list[int], tag: str = "") -> dict[str, int]:
    """One binary per vehicle tied to its assignment sum; branching on these
    in/out decisions first keeps the search tree balanced."""
    assigned: dict[str, list[int]] = {}
    for k, cfg in enumerate(configs):
        assigned.setdefault(cfg.vehicle_id, []).append(y[k])
    w_of: dict[str, int] = {}
    for vid, cols in sorted(assigned.items()):
        w = model.add_var(f"{tag}w_{vid}", 0.0, 1.0, integer=True)
        model.add_constr({**{yk: 1.0 for yk in cols}, w: -1.0}, "=", 0.0, f"{tag}wdef_{vid}")
        w_of[vid] = w
    return w_of


def _dedup_positions(configs) -> list[Configuration]:
    # vehicle position does not enter any constraint coefficient, so one
    # orientation per (footprint, vehicle, slide, angle) suffices for pricing
    seen = {}
    for cfg in configs:
        key = (cfg.footprint, cfg.vehicle_id, cfg.slide, cfg.angle)
        if key not in seen or cfg.position == "forward":
            seen[key] = cfg
    return sorted(seen.values(), key=lambda c: c.signature)


def identical_vehicle_groups(
    candidates: list[Vehicle],
    profits: dict[str, float],
    nogood_members: frozenset[str],
) -> list[list[str]]:
    """Interchangeable-vehicle chains (same type, dealer, and profit; not
    named by any branching no-good) for symmetry-breaking rows."""
    groups: dict[tuple, list[str]] = {}
    for v in sorted(candidates, key=lambda v: v.id):
        if v.id in nogood_members:
            continue
        key = (v.type_name, v.dealer_id, round(profits.get(v.id, 0.0), 12))
        groups.setdefault(key, []).append(v.id)
    return [g for g in groups.values() if len(g) > 1]


def build_ldp(
    carrier: CarrierType,
    configs,
    vehicles: dict[str, Vehicle],
    duals: DualPrices,
    route_order: dict[str, int],
    nogoods: tuple[frozenset[str], ...] = (),
) -> tuple[LinearModel, list[Configuration]]:
    """Pricing model: minimize the column reduced cost
    c_t - sigma_t - sum (d_v + r_v) y(alpha) over feasible loads."""
    sigma = duals.capacity.get(carrier.id, 0.0)
    profits = {vid: duals.vehicle.get(vid, 0.0) + vehicles[vid].revenue for vid in vehicles}

    kept = _dedup_positions(configs)
    if not nogoods:
        # nonpositive-profit vehicles never improve the reduced cost; with
        # no-goods present they may be needed to sidestep a forbidden set
        kept = [c for c in kept if profits[c.vehicle_id] > 1e-12]

    model = LinearModel(f"ldp_{carrier.id}", sense="min")
    model.objective_constant = carrier.operating_cost - sigma
    y = [
        model.add_var(f"y{k}", 0.0, 1.0, obj=-profits[cfg.vehicle_id], integer=True)
        for k, cfg in enumerate(kept)
    ]
    u_vars = add_load_constraints(
        model, carrier, vehicles, kept, y, route_order, v_max=carrier.v_max
    )
    if u_vars:
        model.add_constr({uv: 1.0 for uv in u_vars}, "<=", float(carrier.v_max), "v_max")
    add_vehicle_indicators(model, kept, y)

    assigned: dict[str, dict[int, float]] = {}
    for k, cfg in enumerate(kept):
        assigned.setdefault(cfg.vehicle_id, {})[y[k]] = 1.0
    for g, fset in enumerate(nogoods):
        coeffs: dict[int, float] = {}
        in_model = 0
        for vid, cols in assigned.items():
            sign = 1.0 if vid in fset else -1.0
            if vid in fset:
                in_model += 1
            for yk in cols:
                coeffs[yk] = sign
        if in_model < len(fset):
            continue  # some forbidden vehicle has no configs; set unreachable
        model.add_constr(coeffs, "<=", float(len(fset) - 1), f"nogood_{g}")

    candidates = [vehicles[vid] for vid in assigned]
    members = frozenset().union(*nogoods) if nogoods else frozenset()
    for chain in identical_vehicle_groups(candidates, profits, members):
        for lo_id, hi_id in zip(chain, chain[1:]):
            coeffs = {yk: -1.0 for yk in assigned[lo_id]}
            for yk in assigned[hi_id]:
                coeffs[yk] = 1.0
            model.add_constr(coeffs, "<=", 0.0, f"sym_{hi_id}")
    return model, kept


def decode_load(
    carrier: CarrierType,
    model: LinearModel,
    kept: list[Configuration],
    result: SolveResult,
    vehicles: dict[str, Vehicle],
    route_order: dict[str, int],
) -> Load:
    return decode_from_x(carrier, model, kept, result.x, result.objective, vehicles, route_order)


def decode_from_x(
    carrier: CarrierType,
    model: LinearModel,
    kept: list[Configuration],
    x,
    objective: float,
    vehicles: dict[str, Vehicle],
    route_order: dict[str, int],
) -> Load:
    chosen = tuple(cfg for k, cfg in enumerate(kept) if x[k] > 0.5)
    reliefs = []
    for j, name in enumerate(model.var_names):
        if name.startswith("h_") and x[j] > 1e-9:
            _, ramp_id, slide = name.split("_")
            reliefs.append((int(ramp_id), slide, float(x[j])))
    violations = count_violations(chosen, carrier, vehicles, route_order)
    return Load(
        carrier_type=carrier.id,
        configs=chosen,
        slide_reliefs=tuple(reliefs),
        violations=violations,
        reduced_cost=objective,
    )


def price(
    carrier: CarrierType,
    configs,
    vehicles: dict[str, Vehicle],
    duals: DualPrices,
    route_order: dict[str, int],
    nogoods: tuple[frozenset[str], ...] = (),
    time_limit: float | None = None,
    early_stop: bool = False,
    node_limit: int | None = None,
) -> Load | None:
    """Solve the pricing problem; a Load comes back only with strictly
    negative reduced cost and only after passing independent validation."""
    model, kept = build_ldp(carrier, configs, vehicles, duals, route_order, nogoods)
    if not kept:
        return None
    priority = {
        j: 1 for j, name in enumerate(model.var_names) if name.startswith("w_")
    }
    result = solve_milp(
        model,
        time_limit=time_limit,
        stop_at_incumbent=-NEGATIVE_RC_TOL if early_stop else None,
        node_limit=node_limit,
        cutoff=-NEGATIVE_RC_TOL,
        branch_priority=priority,
        priority_in_dive=False,
    )
    return _finish(carrier, model, kept, result, vehicles, route_order)


def _finish(carrier, model, kept, result, vehicles, route_order) -> Load | None:
    if result.x is None or result.objective >= -NEGATIVE_RC_TOL:
        return None
    load = decode_load(carrier, model, kept, result, vehicles, route_order)
    if not load.configs:
        return None
    problems = validate_load(load, carrier, vehicles, route_order)
    if problems:
        raise PricingError(f"pricer returned an invalid load: {problems}")
    return load


class Pricer:
    """Reusable pricing state for one carrier type.

    The constraint skeleton never changes between column-generation
    iterations, so it is built once over the full configuration set; each
    solve rewrites only the objective coefficients and warm-starts the root
    relaxation from the previous basis.  A change in the no-good set (new
    branching decisions) triggers a rebuild."""

    def __init__(self, carrier: CarrierType, configs, vehicles, route_order):
        self.carrier = carrier
        self.vehicles = vehicles
        self.route_order = route_order
        self.kept = _dedup_positions(configs)
        self._sig: tuple | None = None
        self._model: LinearModel | None = None
        self._assigned: dict[str, list[int]] = {}
        self._root_warm = None
        self.last_solve_complete = True  # False when the solve timed out
        self.last_bound = -INF_BOUND  # valid lower bound on the reduced cost
        self.last_pool: list[Load] = []  # bonus columns from the last solve

    def _ensure(self, nogoods: tuple[frozenset[str], ...]):
        sig = tuple(sorted((tuple(sorted(f)) for f in nogoods)))
        if self._model is not None and sig == self._sig:
            return
        model = LinearModel(f"ldp_{self.carrier.id}", sense="min")
        y = [
            model.add_var(f"y{k}", 0.0, 1.0, integer=True)
            for k in range(len(self.kept))
        ]
        u_vars = add_load_constraints(
            model,
            self.carrier,
            self.vehicles,
            self.kept,
            y,
            self.route_order,
            v_max=self.carrier.v_max,
        )
        if u_vars:
            model.add_constr(
                {uv: 1.0 for uv in u_vars}, "<=", float(self.carrier.v_max), "v_max"
            )
        assigned: dict[str, list[int]] = {}
        for k, cfg in enumerate(self.kept):
            assigned.setdefault(cfg.vehicle_id, []).append(y[k])
        for g, fset in enumerate(sig):
            if any(vid not in assigned for vid in fset):
                continue
            coeffs: dict[int, float] = {}
            for vid, cols in assigned.items():
                sign = 1.0 if vid in fset else -1.0
                for yk in cols:
                    coeffs[yk] = sign
            model.add_constr(coeffs, "<=", float(len(fset) - 1), f"nogood_{g}")
        w_of = add_vehicle_indicators(model, self.kept, y)
        self._priority = {w: 1 for w in w_of.values()}
        self._model = model
        self._assigned = assigned
        self._sig = sig
        self._root_warm = None

    def solve(
        self,
        duals: DualPrices,
        nogoods: tuple[frozenset[str], ...] = (),
        time_limit: float | None = None,
        early_stop: bool = False,
        rc_cutoff: float = -NEGATIVE_RC_TOL,
    ) -> Load | None:
        """Best column with reduced cost below `rc_cutoff` (exact below the
        cutoff); None certifies that none exists, with `last_bound` holding a
        valid lower bound on the optimal reduced cost."""
        self._ensure(nogoods)
        model = self._model
        if not self.kept:
            self.last_bound = 0.0
            self.last_solve_complete = True
            return None
        for k, cfg in enumerate(self.kept):
            model.obj[k] = -(duals.vehicle.get(cfg.vehicle_id, 0.0) + self.vehicles[cfg.vehicle_id].revenue)
        model.objective_constant = self.carrier.operating_cost - duals.capacity.get(
            self.carrier.id, 0.0
        )
        cutoff = min(-NEGATIVE_RC_TOL, rc_cutoff)
        # closing zero-profit placements trims padding-only column variants;
        # with no-goods in play a padded load may be the only legal improving
        # one, so a clean miss is confirmed unfiltered
        ub = np.array(model.ub)
        for k in range(len(self.kept)):
            if model.obj[k] >= -1e-12:
                ub[k] = 0.0

        def run(var_ub):
            result = solve_milp(
                model,
                time_limit=time_limit,
                stop_at_incumbent=cutoff if early_stop else None,
                root_warm=self._root_warm,
                cutoff=cutoff,
                var_ub=var_ub,
                branch_priority=self._priority,
                priority_in_dive=False,
                keep_incumbents=POOL_HARVEST,
                stop_count=POOL_HARVEST // 2 if early_stop else 1,
            )
            if result.root_lp is not None:
                self._root_warm = result.root_lp
            timed_out = result.status == "time-limit" and result.x is None
            return result, not timed_out

        result, proven = run(ub)
        load = _finish(self.carrier, model, self.kept, result, self.vehicles, self.route_order)
        if load is None and proven and nogoods:
            result, proven = run(None)
            load = _finish(self.carrier, model, self.kept, result, self.vehicles, self.route_order)
        self.last_solve_complete = proven
        self.last_bound = result.bound if result.bound is not None else -INF_BOUND
        self.last_pool = []
        if load is not None:
            seen = {load.column_key}
            for obj, x in result.incumbents:
                if obj >= -NEGATIVE_RC_TOL:
                    continue
                extra = decode_from_x(
                    self.carrier, model, self.kept, x, obj, self.vehicles, self.route_order
                )
                if extra.configs and extra.column_key not in seen:
                    if not validate_load(extra, self.carrier, self.vehicles, self.route_order):
                        seen.add(extra.column_key)
                        self.last_pool.append(extra)
        return load


# ---------------------------------------------------------------------------
# unloading simulation and the standalone validators


def count_violations(
    configs,
    carrier: CarrierType,
    vehicles: dict[str, Vehicle],
    route_order: dict[str, int],
) -> int:
    """Replay the route: for each occupied footprint, count the occupied
    footprints on its unloading path whose vehicle leaves at a strictly
    later stop (each such vehicle is unloaded and reloaded once)."""
    placed = [
        (cfg.footprint, _qset(carrier, cfg.footprint), _stop_of(cfg, vehicles, route_order))
        for cfg in configs
    ]
    total = 0
    for fp, qs, stop in placed:
        for other_fp, _, other_stop in placed:
            if other_fp == fp:
                continue
            if set(other_fp) & qs and other_stop > stop:
                total += 1
    return total


def validate_load(
    load_or_configs,
    carrier: CarrierType,
    vehicles: dict[str, Vehicle],
    route_order: dict[str, int],
    exclusions: frozenset[tuple[str, int, str]] = frozenset(),
    v_max: int | None = None,
) -> list[str]:
    """Every constraint family re-checked without the solver; returns the
    failed family names (empty list means the load is feasible)."""
    configs = load_or_configs.configs if isinstance(load_or_configs, Load) else tuple(load_or_configs)
    cap = carrier.v_max if v_max is None else v_max
    problems = []
    problems += check_configs(configs, carrier, vehicles, exclusions)
    problems += check_heights(configs, carrier, vehicles)
    problems += check_weights(configs, carrier, vehicles)
    problems += check_lengths(configs, carrier)
    problems += check_splits(configs, carrier)
    problems += check_assignment(configs, carrier)
    problems += check_violations(configs, carrier, vehicles, route_order, cap)
    return problems


def check_configs(configs, carrier, vehicles, exclusions) -> list[str]:
    from .physics import footprint_geometry

    out = []
    for cfg in configs:
        geom = footprint_geometry(carrier, cfg.footprint)
        v = vehicles[cfg.vehicle_id]
        if v.wheelbase > geom.base_length + _EPS:
            out.append(f"config: wheelbase of {v.id} exceeds ramp base {cfg.footprint}")
        if cfg.angle > geom.max_slide_angle + 1e-12:
            out.append(f"config: slide angle on {cfg.footprint} exceeds the ramp cap")
        if (cfg.slide == "none") != (cfg.angle == 0.0):
            out.append(f"config: slide/angle mismatch on {cfg.footprint}")
        if any((carrier.id, r, v.type_name) in exclusions for r in cfg.footprint):
            out.append(f"config: OEM exclusion forbids {v.type_name} on {cfg.footprint}")
    return out


def check_heights(configs, carrier, vehicles) -> list[str]:
    upper = set(carrier.upper_ramps)
    single = {cfg.footprint[0]: cfg for cfg in configs if len(cfg.footprint) == 1}
    out = []
    for hs in carrier.height_sets:
        total = sum(
            vehicles[cfg.vehicle_id].height for cfg in configs if set(cfg.footprint) & set(hs)
        )
        relief = 0.0
        for ramp_id in hs:
            if ramp_id not in upper:
                continue
            cfg = single.get(ramp_id)
            if cfg is None or cfg.slide == "none" or not cfg.physics.h_gain:
                continue
            partner = carrier.ramp(ramp_id).lower_partner
            if partner is None:
                relief += cfg.physics.h_gain
                continue
            below = single.get(partner)
            if below is None or below.slide != cfg.slide or not below.physics.h_allow:
                continue
            relief += min(cfg.physics.h_gain, below.physics.h_allow)
        if total - relief > carrier.limits.h_max + _EPS:
            out.append(f"height: set {hs} at {total - relief:.2f} over {carrier.limits.h_max}")
    return out


def check_weights(configs, carrier, vehicles) -> list[str]:
    limits = carrier.limits
    steer = sum(cfg.physics.w_steer for cfg in configs)
    drive = sum(cfg.physics.w_drive for cfg in configs)
    tandem = sum(cfg.physics.w_tandem for cfg in configs)
    total = sum(vehicles[cfg.vehicle_id].weight for cfg in configs)
    out = []
    if steer > limits.w_steer_max + _EPS:
        out.append(f"weight: steer axle {steer:.1f} over {limits.w_steer_max}")
    if drive > limits.w_drive_max + _EPS:
        out.append(f"weight: drive axle {drive:.1f} over {limits.w_drive_max}")
    if tandem > limits.w_tandem_max + _EPS:
        out.append(f"weight: tandem axle {tandem:.1f} over {limits.w_tandem_max}")
    if total > limits.w_total_max + _EPS:
        out.append(f"weight: total {total:.1f} over {limits.w_total_max}")
    return out


def check_lengths(configs, carrier) -> list[str]:
    out = []
    for ls in carrier.length_sets:
        loaded = sum(cfg.physics.l_eff for cfg in configs if set(cfg.footprint) & set(ls.ramps))
        if loaded > ls.max_length + _EPS:
            out.append(f"length: set {ls.ramps} at {loaded:.1f} over {ls.max_length}")
    return out


def check_splits(configs, carrier) -> list[str]:
    out = []
    used_splits = {cfg.footprint for cfg in configs if len(cfg.footprint) > 1}
    used_singles = {cfg.footprint[0] for cfg in configs if len(cfg.footprint) == 1}
    for sp in used_splits:
        if sp not in carrier.split_ramps:
            out.append(f"split: {sp} is not a declared split set")
        if set(sp) & used_singles:
            out.append(f"split: members of {sp} also carry single assignments")
    return out


def check_assignment(configs, carrier) -> list[str]:
    out = []
    vehicles_seen: set[str] = set()
    ramps_seen: set[int] = set()
    for cfg in configs:
        if cfg.vehicle_id in vehicles_seen:
            out.append(f"assignment: vehicle {cfg.vehicle_id} appears twice")
        vehicles_seen.add(cfg.vehicle_id)
        for r in cfg.footprint:
            if r in ramps_seen:
                out.append(f"assignment: ramp {r} carries two vehicles")
            ramps_seen.add(r)
    return out


def check_violations(configs, carrier, vehicles, route_order, v_max: int) -> list[str]:
    count = count_violations(configs, carrier, vehicles, route_order)
    if count > v_max:
        return [f"violations: {count} reloads exceed the cap {v_max}"]
    return []
