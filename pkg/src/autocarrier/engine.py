"""Search orchestration: the initial-feasible-solution heuristic, the
branch-and-price tree (column generation per node, most-fractional-toward-one
branching, depth-first node order with ceil children first), the holistic
one-shot model used as a benchmark, and solution metrics."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .configs import AngleGrid, ConfigSet, DEFAULT_GRID, enumerate_configs
from .domain import CarrierType, DomainError, Instance, Vehicle
from .master import ColumnPool, ColumnRef, MasterSolution, solve_rmp
from .mip import LinearModel, solve_milp
from .pricing import (
    DualPrices,
    Load,
    NEGATIVE_RC_TOL,
    Pricer,
    add_load_constraints,
    add_vehicle_indicators,
    count_violations,
    price,
    validate_load,
    _dedup_positions,
)
from .routing import RouteSequence, depot_distances, ppl

__all__ = [
    "ModelSizeError",
    "BnPNode",
    "SolveOutcome",
    "ifs",
    "branch_and_price",
    "solve_ep",
    "metrics",
    "estimate_ep_variables",
]

log = logging.getLogger(__name__)

DEFAULT_TIME_LIMIT = 7200.0
IFS_NODE_LIMIT = 4000
EP_VARIABLE_GUARD = 200_000


class ModelSizeError(DomainError):
    """The holistic model would materialize beyond the variable guard."""


@dataclass
class BnPNode:
    id: int
    parent_id: int | None
    depth: int
    bounds: dict[ColumnRef, tuple[float, float]]
    nogoods: tuple[frozenset[str], ...]
    estimate: float  # parent's converged relaxation objective
    status: str = "open"


@dataclass
class SolveOutcome:
    """Common result shape for the branch-and-price and holistic paths."""

    status: str  # optimal | time-limit | cancelled | infeasible
    objective: float | None
    lower_bound: float
    upper_bound: float
    loads: tuple[Load, ...]
    unassigned: tuple[str, ...]
    stats: dict
    wall_time: float


def route_order_map(route: RouteSequence) -> dict[str, int]:
    return {dealer_id: k for k, dealer_id in enumerate(route.dealer_ids)}


def default_epsilon(instance: Instance) -> float:
    costs = [t.operating_cost for t in instance.carriers] + [instance.penalty]
    ints = []
    for c in costs:
        if abs(c - round(c)) > 1e-9:
            return 1e-6
        ints.append(abs(int(round(c))))
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g == 0:
        return 1e-6
    return (1.0 - 1e-6) * g


def _prepare(instance: Instance, route: RouteSequence, grid: AngleGrid):
    order = route_order_map(route)
    served = [v for v in instance.vehicles if v.dealer_id in order]
    off_route = tuple(v.id for v in instance.vehicles if v.dealer_id not in order)
    vehicles = {v.id: v for v in served}
    config_sets: dict[str, ConfigSet] = {}
    for t in instance.carriers:
        config_sets[t.id] = enumerate_configs(t, served, grid, instance.exclusions)
    return order, vehicles, config_sets, off_route


def ifs(
    instance: Instance,
    route: RouteSequence,
    grid: AngleGrid = DEFAULT_GRID,
    node_limit: int = IFS_NODE_LIMIT,
) -> tuple[ColumnPool, tuple[str, ...]]:
    """Seed the column pool with synthetic duals: repeatedly price a type
    with spare capacity, remove the loaded vehicles, stop when none remain
    or no progress is possible.  Returns the pool and the vehicle ids no
    load could cover."""
    order, vehicles, config_sets, off_route = _prepare(instance, route, grid)
    pool = ColumnPool([t.id for t in instance.carriers])
    remaining = set(vehicles)
    d_init = 2.0 * max((t.operating_cost for t in instance.carriers), default=1.0) + 1.0
    spent = {t.id: 0 for t in instance.carriers}
    types = list(instance.carriers)
    stalled: set[str] = set()
    while remaining:
        usable = [t for t in types if spent[t.id] < t.fleet_cap and t.id not in stalled]
        if not usable:
            break
        t = usable[0]
        duals = DualPrices(vehicle={vid: d_init for vid in remaining}, capacity={})
        configs = [c for c in config_sets[t.id].configs if c.vehicle_id in remaining]
        load = price(t, configs, vehicles, duals, order, node_limit=node_limit)
        if load is None:
            stalled.add(t.id)
            continue
        pool.add_column(load)
        spent[t.id] += 1
        remaining -= load.vehicle_ids
    uncovered = tuple(sorted(remaining)) + off_route
    for vid in uncovered:
        log.warning("vehicle %s left to its non-delivery penalty", vid)
    return pool, uncovered


def _decode_incumbent(
    pool: ColumnPool, sol: MasterSolution
) -> tuple[tuple[Load, ...], tuple[str, ...]]:
    loads = tuple(
        pool.loads(ref.carrier_type)[ref.index] for ref, val in sol.x.items() if val > 0.5
    )
    unassigned = tuple(sorted(vid for vid, val in sol.u.items() if val > 0.5))
    return loads, unassigned


def branch_and_price(
    instance: Instance,
    route: RouteSequence,
    *,
    grid: AngleGrid = DEFAULT_GRID,
    epsilon: float | None = None,
    time_limit: float = DEFAULT_TIME_LIMIT,
    interleaved: bool = False,
    pricing_threads: int = 1,
    progress=None,
    cancel=None,
) -> SolveOutcome:
    """Exact loading optimization over the routed dealers.

    Each tree node runs column generation to convergence (set `interleaved`
    to add only the single most negative column per pass), branches on the
    fractional column closest to zero, fixing it out (with a pricing
    no-good) or in, and explores depth-first with the ceil child first."""
    t_start = time.perf_counter()
    epsilon = default_epsilon(instance) if epsilon is None else epsilon
    cg_tail_tol = min(1e-4, 0.25 * epsilon)
    order, vehicles, config_sets, off_route = _prepare(instance, route, grid)
    pricers = {
        t.id: Pricer(t, config_sets[t.id].configs, vehicles, order)
        for t in instance.carriers
    }

    pool, ifs_uncovered = ifs(instance, route, grid)
    stats = {
        "nodes": 0,
        "columns": len(pool),
        "pricing_solves": 0,
        "lp_solves": 0,
        "unloadable": sorted(
            set().union(*(cs.unloadable for cs in config_sets.values()))
            if config_sets
            else set()
        ),
    }

    # the IFS pool itself is a feasible solution: seed the incumbent with it
    ifs_loads = tuple(ld for t in instance.carriers for ld in pool.loads(t.id))
    ub = sum(
        instance.carrier(ld.carrier_type).operating_cost for ld in ifs_loads
    ) + instance.penalty * len(ifs_uncovered)
    incumbent: tuple[tuple[Load, ...], tuple[str, ...]] | None = (ifs_loads, ifs_uncovered)
    total_caps = sum(t.fleet_cap for t in instance.carriers)
    node_seq = 0
    root = BnPNode(0, None, 0, {}, (), -math.inf)
    stack = [root]
    status = "optimal"
    single_type = len(instance.carriers) == 1

    def remaining_time() -> float:
        return time_limit - (time.perf_counter() - t_start)

    def lower_bound() -> float:
        open_est = [nd.estimate for nd in stack]
        lo = min(open_est) if open_est else math.inf
        return min(lo, ub)

    def price_types(duals, merged_guards, rc_cutoff):
        results = {}

        def run(t: CarrierType):
            return pricers[t.id].solve(
                duals,
                nogoods=merged_guards[t.id],
                early_stop=single_type,
                time_limit=max(1.0, remaining_time()),
                rc_cutoff=rc_cutoff,
            )

        if pricing_threads > 1 and len(instance.carriers) > 1:
            with ThreadPoolExecutor(max_workers=pricing_threads) as pool_exec:
                futures = {t.id: pool_exec.submit(run, t) for t in instance.carriers}
                results = {tid: f.result() for tid, f in futures.items()}
        else:
            results = {t.id: run(t) for t in instance.carriers}
        return results

    while stack:
        if cancel is not None and cancel():
            status = "cancelled"
            break
        if remaining_time() <= 0:
            status = "time-limit"
            break
        node = stack.pop()
        if node.estimate >= ub - epsilon:
            node.status = "fathomed"
            continue
        stats["nodes"] += 1

        # column generation at this node
        stall_guards: dict[str, set[frozenset[str]]] = {t.id: set() for t in instance.carriers}
        sol = None
        node_bound = None
        while True:
            if cancel is not None and cancel():
                status = "cancelled"
                break
            if remaining_time() <= 0:
                status = "time-limit"
                break
            sol = solve_rmp(pool, instance, node.bounds)
            stats["lp_solves"] += 1
            merged = {
                t.id: node.nogoods + tuple(sorted(stall_guards[t.id], key=sorted))
                for t in instance.carriers
            }
            # the integer bound narrows what pricing must certify: only
            # columns below this reduced cost can pull the node LP under
            # UB - epsilon, so weaker columns need not be generated
            rc_need = (ub - epsilon - sol.objective) / total_caps
            found = price_types(sol.duals, merged, rc_need)
            stats["pricing_solves"] += len(found)
            if any(not pricers[t.id].last_solve_complete for t in instance.carriers):
                status = "time-limit"
                break
            negatives = [
                (load.reduced_cost, t.id, load)
                for t in instance.carriers
                if (load := found.get(t.id)) is not None
            ]
            if not negatives:
                if rc_need < -NEGATIVE_RC_TOL:
                    # every type certified rc >= rc_need: the node LP cannot
                    # go below UB - epsilon, which fathoms the node
                    node_bound = ub - epsilon
                else:
                    node_bound = sol.objective
                break
            # valid node bound from the pricing bounds: fleet cap times the
            # most negative achievable reduced cost per type
            lagrangian = sol.objective + sum(
                t.fleet_cap * min(0.0, pricers[t.id].last_bound)
                for t in instance.carriers
            )
            if sol.objective - lagrangian <= cg_tail_tol and (
                not sol.integral
                or sol.objective < ub - 1e-9
                or lagrangian >= ub - epsilon
            ):
                node_bound = lagrangian
                break
            negatives.sort(key=lambda item: (item[0], item[1]))
            to_add = negatives[:1] if interleaved else negatives
            for _, tid, load in to_add:
                ref, added = pool.add_column(load)
                if added:
                    stats["columns"] += 1
                else:
                    # the pricer rediscovered a pool column sitting at its
                    # upper bound; exclude it via a no-good and re-price
                    stall_guards[tid].add(load.vehicle_ids)
                for bonus in pricers[tid].last_pool:
                    _, bonus_added = pool.add_column(bonus)
                    if bonus_added:
                        stats["columns"] += 1
        if status in ("cancelled", "time-limit"):
            break
        if node_bound is None or sol is None:
            continue

        # an integral master solution is a feasible plan regardless of how
        # the node bound was certified
        if sol.integral and sol.objective < ub - 1e-9:
            loads, unassigned = _decode_incumbent(pool, sol)
            for load in loads:
                problems = validate_load(load, instance.carrier(load.carrier_type), vehicles, order)
                if problems:
                    raise RuntimeError(f"incumbent failed validation: {problems}")
            covered = set().union(*(ld.vehicle_ids for ld in loads)) if loads else set()
            for v in vehicles:
                if v not in covered and v not in unassigned:
                    raise RuntimeError(f"incumbent drops vehicle {v}")
            ub = sol.objective
            incumbent = (loads, unassigned)

        if node_bound >= ub - epsilon:
            node.status = "integral" if sol.integral else "fathomed"
            if progress is not None:
                progress(stats["nodes"], lower_bound(), ub)
            if ub - lower_bound() <= epsilon:
                break
            continue

        if sol.integral:
            # converged and integral at its own bound: the node is solved
            node.status = "integral"
        else:
            frac = [
                (ref, val)
                for ref, val in sol.x.items()
                if abs(val - round(val)) > 1e-6
            ]
            # the printed rule: most fractional toward one, i.e. the candidate
            # with the largest |x - 1|; ties to the lowest column
            ref, val = min(
                frac,
                key=lambda item: (-abs(item[1] - 1.0), item[0].carrier_type, item[0].index),
            )
            node.status = "branched"
            chosen_load = pool.loads(ref.carrier_type)[ref.index]
            floor_bounds = dict(node.bounds)
            floor_bounds[ref] = (0.0, 0.0)
            ceil_bounds = dict(node.bounds)
            ceil_bounds[ref] = (1.0, 1.0)
            node_seq += 1
            floor_child = BnPNode(
                node_seq,
                node.id,
                node.depth + 1,
                floor_bounds,
                node.nogoods + (chosen_load.vehicle_ids,),
                node_bound,
            )
            node_seq += 1
            ceil_child = BnPNode(
                node_seq, node.id, node.depth + 1, ceil_bounds, node.nogoods, node_bound
            )
            stack.append(floor_child)
            stack.append(ceil_child)  # popped first: drive toward integrality

        if progress is not None:
            progress(stats["nodes"], lower_bound(), ub)
        if ub - lower_bound() <= epsilon:
            break

    lb = lower_bound()
    if status == "optimal" and not stack:
        lb = ub
    wall = time.perf_counter() - t_start
    loads, unassigned = incumbent if incumbent is not None else ((), tuple(sorted(vehicles)))
    return SolveOutcome(
        status=status,
        objective=ub if incumbent is not None else None,
        lower_bound=lb,
        upper_bound=ub,
        loads=loads,
        unassigned=tuple(sorted(set(unassigned) | set(off_route))),
        stats=stats,
        wall_time=wall,
    )


# ---------------------------------------------------------------------------
# holistic benchmark model


def estimate_ep_variables(instance: Instance, route: RouteSequence, grid: AngleGrid, copies: dict[str, int]) -> int:
    order = route_order_map(route)
    served = [v for v in instance.vehicles if v.dealer_id in order]
    total = 0
    n_stops = len(route.dealer_ids)
    for t in instance.carriers:
        n_fp = len(t.footprints())
        n_y = n_fp * len(served) * (1 + 2 * max(0, len(grid.angles) - 1))
        per_copy = n_y + 2 * n_fp * n_stops + len(t.split_ramps) + 4 * len(t.upper_ramps) + 1
        total += copies[t.id] * per_copy
    return total


def solve_ep(
    instance: Instance,
    route: RouteSequence,
    *,
    fleet_cap_per_type: int | None = None,
    grid: AngleGrid = DEFAULT_GRID,
    time_limit: float = DEFAULT_TIME_LIMIT,
    variable_guard: int = EP_VARIABLE_GUARD,
) -> SolveOutcome:
    """One monolithic model over identical carrier copies; mirrors the
    branch-and-price objective for benchmarking and stress comparisons."""
    t_start = time.perf_counter()
    order, vehicles, config_sets, off_route = _prepare(instance, route, grid)
    if off_route:
        raise DomainError(
            f"holistic model requires all dealers routed; missing {sorted(off_route)[:3]}"
        )
    n_v = len(vehicles)
    default_copies = max(1, math.ceil(n_v / 6))
    copies = {
        t.id: min(fleet_cap_per_type or default_copies, t.fleet_cap)
        for t in instance.carriers
    }
    est = estimate_ep_variables(instance, route, grid, copies)
    if est > variable_guard:
        raise ModelSizeError(
            f"holistic model would need about {est} variables (guard {variable_guard})"
        )

    model = LinearModel("ep", sense="min")
    covering: dict[str, dict[int, float]] = {vid: {} for vid in vehicles}
    copy_meta = []
    carrier_use_vars = []
    indicator_vars: set[int] = set()
    for t in instance.carriers:
        kept = _dedup_positions(config_sets[t.id].configs)
        p_vars = []
        for k in range(copies[t.id]):
            tag = f"{t.id}.{k}."
            pv = model.add_var(f"{tag}p", 0.0, 1.0, obj=t.operating_cost, integer=True)
            carrier_use_vars.append(pv)
            y = [
                model.add_var(f"{tag}y{i}", 0.0, 1.0, integer=True)
                for i in range(len(kept))
            ]
            u_vars = add_load_constraints(
                model, t, vehicles, kept, y, order, tag=tag, v_max=t.v_max
            )
            indicator_vars.update(add_vehicle_indicators(model, kept, y, tag=tag).values())
            if u_vars:
                model.add_constr(
                    {uv: 1.0 for uv in u_vars}, "<=", float(t.v_max), f"{tag}v_max"
                )
            coeffs = {yk: 1.0 for yk in y}
            coeffs[pv] = -float(len(t.ramps))
            model.add_constr(coeffs, "<=", 0.0, f"{tag}link")
            for i, cfg in enumerate(kept):
                covering[cfg.vehicle_id][y[i]] = 1.0
            if p_vars:
                model.add_constr({p_vars[-1]: -1.0, pv: 1.0}, "<=", 0.0, f"{tag}sym")
            p_vars.append(pv)
            copy_meta.append((t, k, kept, y))
    for vid in sorted(vehicles):
        if not covering[vid]:
            raise DomainError(f"vehicle {vid} fits no carrier; holistic model infeasible")
        model.add_constr(covering[vid], ">=", 1.0, f"cover_{vid}")

    # interchangeable vehicles: force id-ordered usage
    groups: dict[tuple, list[str]] = {}
    for v in sorted(vehicles.values(), key=lambda v: v.id):
        groups.setdefault((v.type_name, v.dealer_id), []).append(v.id)
    for chain in groups.values():
        for lo_id, hi_id in zip(chain, chain[1:]):
            coeffs = dict.fromkeys(covering[lo_id], -1.0)
            for yk in covering[hi_id]:
                coeffs[yk] = 1.0
            model.add_constr(coeffs, "<=", 0.0, f"vsym_{hi_id}")

    # settle carrier counts first, then vehicle membership, then placements
    priority = {w: 1 for w in indicator_vars}
    priority.update({pv: 2 for pv in carrier_use_vars})
    result = solve_milp(model, time_limit=time_limit, branch_priority=priority)
    wall = time.perf_counter() - t_start
    if result.status in ("infeasible", "unbounded") or result.x is None:
        status = result.status if result.x is None else result.status
        return SolveOutcome(
            status,
            None,
            result.bound if math.isfinite(result.bound) else -math.inf,
            math.inf,
            (),
            tuple(sorted(vehicles)),
            {"nodes": result.nodes},
            wall,
        )

    loads = []
    for t, k, kept, y in copy_meta:
        chosen = tuple(cfg for i, cfg in enumerate(kept) if result.x[y[i]] > 0.5)
        if not chosen:
            continue
        load = Load(
            carrier_type=t.id,
            configs=chosen,
            slide_reliefs=(),
            violations=count_violations(chosen, t, vehicles, order),
            reduced_cost=0.0,
        )
        problems = validate_load(load, t, vehicles, order)
        if problems:
            raise RuntimeError(f"holistic solution failed validation: {problems}")
        loads.append(load)
    return SolveOutcome(
        status=result.status if result.status != "stopped" else "optimal",
        objective=result.objective,
        lower_bound=result.bound,
        upper_bound=result.objective,
        loads=tuple(loads),
        unassigned=(),
        stats={"nodes": result.nodes, "gap": result.gap},
        wall_time=wall,
    )


def metrics(
    outcome: SolveOutcome, instance: Instance, route: RouteSequence
) -> dict:
    """opt / LR / PPL / reload usage for a finished solve."""
    opt = len(outcome.loads)
    delivered = (
        len(set().union(*(ld.vehicle_ids for ld in outcome.loads))) if outcome.loads else 0
    )
    lr = delivered / opt if opt else 0.0
    if opt == 0:
        log.warning("no loads in solution; LR reported as 0")
    dt = depot_distances(instance.source, instance.dealers)
    vehicles = {v.id: v for v in instance.vehicles}
    per_load_ppl = []
    for ld in outcome.loads:
        counts: dict[str, int] = {}
        for vid in ld.vehicle_ids:
            counts[vehicles[vid].dealer_id] = counts.get(vehicles[vid].dealer_id, 0) + 1
        carrier = instance.carrier(ld.carrier_type)
        per_load_ppl.append(ppl(route, counts, carrier, dt))
    return {
        "opt": opt,
        "lr": lr,
        "delivered": delivered,
        "ppl_per_load": per_load_ppl,
        "ppl_mean": sum(per_load_ppl) / len(per_load_ppl) if per_load_ppl else 0.0,
        "violations_used": sum(ld.violations for ld in outcome.loads),
        "runtime_s": outcome.wall_time,
    }
