"""Model building plus the LP / MILP solving used by the master, pricing, and
holistic models: a dense bounded revised simplex (see kernels.simplex_core)
and a best-bound branch-and-bound wrapper."""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels

__all__ = ["LinearModel", "SolveResult", "KernelError", "solve_lp", "solve_milp"]

INF = math.inf

FEAS_TOL = 1e-7
INT_TOL = 1e-6
DUAL_TOL = 1e-6


class KernelError(RuntimeError):
    """Raised when a solve cannot be certified (numerics or misuse)."""


@dataclass
class _Constr:
    idx: np.ndarray
    val: np.ndarray
    sense: str
    rhs: float
    name: str


class LinearModel:
    """Sparse model builder; sealed into dense arrays at solve time."""

    def __init__(self, name: str = "model", sense: str = "min"):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.name = name
        self.sense = sense
        self.objective_constant = 0.0
        self.var_names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.obj: list[float] = []
        self.integer: list[bool] = []
        self.constrs: list[_Constr] = []
        self._static = None  # memoized dense rows/bounds; objective excluded

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_constrs(self) -> int:
        return len(self.constrs)

    def add_var(
        self,
        name: str | None = None,
        lb: float = 0.0,
        ub: float = INF,
        obj: float = 0.0,
        integer: bool = False,
    ) -> int:
        if lb > ub:
            raise ValueError(f"variable {name}: lb {lb} > ub {ub}")
        if lb == -INF and ub == INF:
            raise ValueError(f"variable {name}: free variables are not supported")
        self.var_names.append(name or f"x{len(self.var_names)}")
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.obj.append(float(obj))
        self.integer.append(bool(integer))
        self._static = None
        return len(self.var_names) - 1

    def add_constr(
        self,
        coeffs: dict[int, float],
        sense: str,
        rhs: float,
        name: str | None = None,
    ) -> int:
        if sense not in ("<=", ">=", "="):
            raise ValueError(f"bad constraint sense {sense!r}")
        n = self.num_vars
        idx = np.fromiter(coeffs.keys(), dtype=np.int64, count=len(coeffs))
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ValueError(f"constraint {name}: references undeclared variable")
        val = np.fromiter(coeffs.values(), dtype=np.float64, count=len(coeffs))
        self.constrs.append(_Constr(idx, val, sense, float(rhs), name or f"c{len(self.constrs)}"))
        self._static = None
        return len(self.constrs) - 1

    def dense_arrays(self):
        """Equality standard form with one trailing slack column per row.

        The row matrix and bounds are memoized (the solver never mutates
        them); only the cost vector tracks objective edits, so repricing a
        sealed model is cheap."""
        n = self.num_vars
        m = self.num_constrs
        if self._static is None:
            A = np.zeros((m, n + m))
            b = np.empty(m)
            lb = np.array(self.lb + [0.0] * m)
            ub = np.array(self.ub + [0.0] * m)
            for r, con in enumerate(self.constrs):
                A[r, con.idx] = con.val
                A[r, n + r] = 1.0
                b[r] = con.rhs
                if con.sense == "<=":
                    lb[n + r], ub[n + r] = 0.0, INF
                elif con.sense == ">=":
                    lb[n + r], ub[n + r] = -INF, 0.0
                else:
                    lb[n + r], ub[n + r] = 0.0, 0.0
            self._static = (A, b, lb, ub)
        A, b, lb, ub = self._static
        sgn = 1.0 if self.sense == "min" else -1.0
        c = np.concatenate([sgn * np.array(self.obj, dtype=np.float64), np.zeros(m)])
        return A, b, c, lb.copy(), ub.copy()

    def lp_text(self) -> str:
        """Human-readable LP-format dump for debugging."""
        lines = ["\\ " + self.name, "Minimize" if self.sense == "min" else "Maximize"]
        terms = [
            f"{'+' if o >= 0 else '-'} {abs(o):g} {nm}"
            for o, nm in zip(self.obj, self.var_names)
            if o != 0.0
        ]
        lines.append(" obj: " + (" ".join(terms) or "0"))
        if self.objective_constant:
            lines.append(f" \\ constant: {self.objective_constant:g}")
        lines.append("Subject To")
        op = {"<=": "<=", ">=": ">=", "=": "="}
        for con in self.constrs:
            body = " ".join(
                f"{'+' if v >= 0 else '-'} {abs(v):g} {self.var_names[j]}"
                for j, v in zip(con.idx, con.val)
            )
            lines.append(f" {con.name}: {body or '0'} {op[con.sense]} {con.rhs:g}")
        lines.append("Bounds")
        for nm, lo, hi in zip(self.var_names, self.lb, self.ub):
            lines.append(f" {lo:g} <= {nm} <= {hi:g}")
        gen = [nm for nm, isint in zip(self.var_names, self.integer) if isint]
        if gen:
            lines.append("Generals")
            lines.append(" " + " ".join(gen))
        lines.append("End")
        return "\n".join(lines)


@dataclass
class SolveResult:
    status: str  # optimal | infeasible | unbounded | time-limit | stopped
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    objective: float = math.nan
    bound: float = -INF
    gap: float = math.nan
    nodes: int = 0
    iterations: int = 0
    wall_time: float = 0.0
    max_primal_violation: float = 0.0
    basis: np.ndarray | None = field(default=None, repr=False)
    at_upper: np.ndarray | None = field(default=None, repr=False)
    root_lp: "SolveResult | None" = field(default=None, repr=False)
    incumbents: list = field(default_factory=list, repr=False)  # (objective, x)

    def value(self, j: int) -> float:
        return float(self.x[j])


def _primal_violation(model: LinearModel, x, lb=None, ub=None) -> float:
    lb = model.lb if lb is None else lb
    ub = model.ub if ub is None else ub
    worst = 0.0
    for j in range(model.num_vars):
        worst = max(worst, lb[j] - x[j], x[j] - ub[j])
    for con in model.constrs:
        lhs = float(np.dot(con.val, x[con.idx]))
        if con.sense == "<=":
            worst = max(worst, lhs - con.rhs)
        elif con.sense == ">=":
            worst = max(worst, con.rhs - lhs)
        else:
            worst = max(worst, abs(lhs - con.rhs))
    return worst


def solve_lp(
    model: LinearModel,
    *,
    warm: SolveResult | None = None,
    maxiter: int | None = None,
    lb_override: np.ndarray | None = None,
    ub_override: np.ndarray | None = None,
    certify: bool = True,
) -> SolveResult:
    """LP solve ignoring integrality flags; returns primal and dual vectors.

    `warm` may carry the basis of a related previous solve; bound overrides
    replace the structural variable bounds (used by branch and bound)."""
    t0 = time.perf_counter()
    n = model.num_vars
    m = model.num_constrs
    A, b, c, lb, ub = model.dense_arrays()
    if lb_override is not None:
        lb[:n] = lb_override
    if ub_override is not None:
        ub[:n] = ub_override
    if np.any(lb[:n] > ub[:n]):
        return SolveResult(status="infeasible", wall_time=time.perf_counter() - t0)
    if maxiter is None:
        maxiter = 200 * (m + n) + 10000

    if (
        warm is not None
        and warm.basis is not None
        and warm.basis.size == m
        and warm.at_upper is not None
        and warm.at_upper.size == n + m
    ):
        basis = warm.basis.copy()
        at_upper = warm.at_upper.copy()
        warm_flag = 1
    else:
        basis = np.zeros(m, np.int64)
        at_upper = np.zeros(n + m, np.uint8)
        warm_flag = 0

    if m == 0:
        # pure bound problem: each variable sits at its cheaper bound
        x = np.empty(n)
        sgn = 1.0 if model.sense == "min" else -1.0
        for j in range(n):
            cj = sgn * model.obj[j]
            if cj > 0 or (cj == 0 and lb[j] > -INF):
                x[j] = lb[j]
            else:
                x[j] = ub[j]
            if not np.isfinite(x[j]):
                return SolveResult(status="unbounded", wall_time=time.perf_counter() - t0)
        obj = float(np.dot(np.array(model.obj), x)) + model.objective_constant
        return SolveResult(
            status="optimal",
            x=x,
            duals=np.zeros(0),
            objective=obj,
            bound=obj,
            gap=0.0,
            wall_time=time.perf_counter() - t0,
        )

    status, x, y, obj, niter = kernels.simplex_core(
        A, b, c, lb, ub, basis, at_upper, warm_flag, 1e-9, maxiter
    )
    wall = time.perf_counter() - t0
    if status == kernels.SPX_INFEASIBLE:
        return SolveResult(status="infeasible", iterations=niter, wall_time=wall)
    if status == kernels.SPX_UNBOUNDED:
        return SolveResult(status="unbounded", iterations=niter, wall_time=wall)
    if status == kernels.SPX_ITER_LIMIT:
        raise KernelError(f"simplex iteration limit hit on {model.name} ({niter} pivots)")

    sgn = 1.0 if model.sense == "min" else -1.0
    xs = x[:n].copy()
    duals = sgn * y
    objective = sgn * obj + model.objective_constant
    viol = 0.0
    if certify:
        viol = _primal_violation(model, xs, lb[:n], ub[:n])
        if viol > 1e-4:
            raise KernelError(f"uncertified LP solution on {model.name}: violation {viol:.2e}")
    return SolveResult(
        status="optimal",
        x=xs,
        duals=duals,
        objective=objective,
        bound=objective,
        gap=0.0,
        iterations=niter,
        wall_time=wall,
        max_primal_violation=viol,
        basis=basis,
        at_upper=at_upper,
    )


def _objective_granularity(model: LinearModel) -> float:
    """Positive g when every optimum is a multiple of g (integral costs on
    integer variables, zero costs elsewhere); 0 otherwise."""
    ints: list[int] = []
    for j in range(model.num_vars):
        cj = model.obj[j]
        if cj == 0.0:
            continue
        if not model.integer[j]:
            return 0.0
        r = round(cj)
        if abs(cj - r) > 1e-9 or r == 0:
            return 0.0
        ints.append(abs(int(r)))
    cst = model.objective_constant
    if abs(cst - round(cst)) > 1e-9:
        return 0.0
    if not ints:
        return 0.0
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    return float(g)


@dataclass(order=True)
class _Node:
    bound: float
    neg_depth: int
    seq: int
    parent: "_Node | None" = field(compare=False, default=None)
    var: int = field(compare=False, default=-1)
    lo: float = field(compare=False, default=0.0)
    hi: float = field(compare=False, default=0.0)
    basis: np.ndarray | None = field(compare=False, default=None, repr=False)
    at_upper: np.ndarray | None = field(compare=False, default=None, repr=False)


def _node_bounds(model: LinearModel, node: _Node, base_lb, base_ub):
    lb = base_lb.copy()
    ub = base_ub.copy()
    cur = node
    chain = []
    while cur is not None and cur.var >= 0:
        chain.append(cur)
        cur = cur.parent
    for nd in reversed(chain):
        lb[nd.var] = max(lb[nd.var], nd.lo)
        ub[nd.var] = min(ub[nd.var], nd.hi)
    return lb, ub


def solve_milp(
    model: LinearModel,
    time_limit: float | None = None,
    gap_tol: float = 1e-6,
    *,
    stop_at_incumbent: float | None = None,
    node_limit: int | None = None,
    branch_priority: dict[int, int] | None = None,
    root_warm: SolveResult | None = None,
    cutoff: float | None = None,
    var_lb: np.ndarray | None = None,
    var_ub: np.ndarray | None = None,
    branch_rule: str = "frac",
    priority_in_dive: bool = True,
    keep_incumbents: int = 0,
    stop_count: int = 1,
) -> SolveResult:
    """Best-bound branch and bound on the LP kernel.

    Branches on the most fractional integer variable (within the highest
    `branch_priority` class that is fractional, when given); node ties break
    toward deeper nodes then insertion order, so runs are deterministic.
    With `stop_at_incumbent`, returns early (status "stopped") once the
    incumbent objective is at or below the threshold.  With `cutoff`, the
    search discards everything at or above the cutoff: the result is still
    the exact optimum whenever that optimum lies below the cutoff, and
    status "cutoff" certifies that no solution below it exists."""
    t0 = time.perf_counter()
    if (stop_at_incumbent is not None or cutoff is not None) and model.sense != "min":
        raise ValueError("stop_at_incumbent/cutoff are only supported for minimization")
    int_vars = [j for j in range(model.num_vars) if model.integer[j]]
    base_lb = np.array(model.lb) if var_lb is None else np.asarray(var_lb, dtype=float)
    base_ub = np.array(model.ub) if var_ub is None else np.asarray(var_ub, dtype=float)
    if not int_vars:
        return solve_lp(model, lb_override=base_lb, ub_override=base_ub)
    int_arr = np.array(int_vars, dtype=np.int64)
    obj_arr = np.array([model.obj[j] for j in int_vars])
    prio_arr = None
    if branch_priority:
        prio_arr = np.array([branch_priority.get(j, 0) for j in int_vars])

    sgn = 1.0 if model.sense == "min" else -1.0
    gran = _objective_granularity(model)

    def tighten(raw_bound: float) -> float:
        # minimization-space bound, optionally rounded up to the cost lattice
        if gran > 0:
            scaled = (raw_bound - sgn * model.objective_constant) / gran
            return math.ceil(scaled - 1e-6) * gran + sgn * model.objective_constant
        return raw_bound

    incumbent_x = None
    incumbent_obj = INF if cutoff is None else cutoff  # minimization space
    nodes_done = 0
    total_iters = 0
    seq = 0
    root_lp_result = None
    collected: list[tuple[float, np.ndarray]] = []
    stops_hit = 0

    root = _Node(bound=-INF, neg_depth=0, seq=seq)
    heap: list[_Node] = [root]
    dive: list[_Node] = []  # LIFO stack used until the first incumbent
    status = "optimal"

    while heap or dive:
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            status = "time-limit"
            break
        if node_limit is not None and nodes_done >= node_limit:
            status = "time-limit"
            break
        if incumbent_x is None and dive:
            node = dive.pop()
        elif dive:
            # incumbent found: fold the dive stack back into the heap
            for nd in dive:
                heapq.heappush(heap, nd)
            dive = []
            node = heapq.heappop(heap)
        else:
            node = heapq.heappop(heap)
        if node.bound >= incumbent_obj - max(gap_tol * abs(incumbent_obj), 1e-9):
            continue
        lb, ub = _node_bounds(model, node, base_lb, base_ub)
        warm = root_warm
        if node.basis is not None:
            warm = SolveResult(status="optimal", basis=node.basis, at_upper=node.at_upper)
        res = solve_lp(
            model,
            warm=warm,
            lb_override=lb[: model.num_vars],
            ub_override=ub[: model.num_vars],
            certify=False,
        )
        nodes_done += 1
        total_iters += res.iterations
        if nodes_done == 1 and res.basis is not None:
            root_lp_result = res
            if res.status == "optimal" and incumbent_obj < INF:
                # reduced-cost fixing against the cutoff: an integer variable
                # whose reduced cost cannot be paid within the remaining gap
                # stays at its bound (bound tightening, exact)
                n_struct = model.num_vars
                duals = res.duals
                sgn_ = 1.0 if model.sense == "min" else -1.0
                gap_room = incumbent_obj - sgn_ * res.objective
                if gap_room < INF:
                    yA = np.zeros(n_struct)
                    for r, con in enumerate(model.constrs):
                        yA[con.idx] += duals[r] * con.val
                    rc = sgn_ * (np.array(model.obj, dtype=float) - yA)
                    for j in int_vars:
                        if abs(res.x[j] - base_lb[j]) <= 1e-9 and rc[j] > gap_room + 1e-9:
                            base_ub[j] = base_lb[j]
                        elif abs(res.x[j] - base_ub[j]) <= 1e-9 and -rc[j] > gap_room + 1e-9:
                            base_lb[j] = base_ub[j]
        if res.status == "infeasible":
            continue
        if res.status == "unbounded":
            return SolveResult(
                status="unbounded", nodes=nodes_done, wall_time=time.perf_counter() - t0
            )
        # work in minimization space for bounding
        min_obj = sgn * res.objective
        node_bound = tighten(min_obj)
        if node_bound >= incumbent_obj - max(gap_tol * abs(incumbent_obj), 1e-9):
            continue

        xi = res.x[int_arr]
        frac_all = np.abs(xi - np.round(xi))
        frac_var = -1
        if np.any(frac_all > INT_TOL):
            cand = frac_all.copy()
            if branch_rule == "cost_frac":
                cand = cand * (1.0 + np.abs(obj_arr))
            cand[frac_all <= INT_TOL] = -1.0
            if prio_arr is not None and (priority_in_dive or incumbent_x is not None):
                # restrict to the highest priority class that is fractional
                best_p = prio_arr[frac_all > INT_TOL].max()
                cand[prio_arr < best_p] = -1.0
            frac_var = int(int_arr[int(np.argmax(cand))])

        if frac_var < 0:
            if min_obj < incumbent_obj - 1e-12:
                incumbent_obj = min_obj
                snapped = res.x.copy()
                snapped[int_arr] = np.round(snapped[int_arr])
                incumbent_x = snapped
                if keep_incumbents and len(collected) < keep_incumbents:
                    collected.append((sgn * min_obj, snapped.copy()))
                if stop_at_incumbent is not None and sgn * incumbent_obj <= stop_at_incumbent:
                    stops_hit += 1
                    if stops_hit >= stop_count:
                        status = "stopped"
                        break
            continue

        xhat = res.x[frac_var]
        seq += 1
        down = _Node(
            bound=node_bound,
            neg_depth=node.neg_depth - 1,
            seq=seq,
            parent=node,
            var=frac_var,
            lo=-INF,
            hi=math.floor(xhat),
            basis=res.basis.copy(),
            at_upper=res.at_upper.copy(),
        )
        seq += 1
        up = _Node(
            bound=node_bound,
            neg_depth=node.neg_depth - 1,
            seq=seq,
            parent=node,
            var=frac_var,
            lo=math.ceil(xhat),
            hi=INF,
            basis=res.basis.copy(),
            at_upper=res.at_upper.copy(),
        )
        if incumbent_x is None:
            # keep diving toward integrality, rounded-up child first
            dive.append(down)
            dive.append(up)
        else:
            heapq.heappush(heap, down)
            heapq.heappush(heap, up)

    wall = time.perf_counter() - t0
    best_open = min((nd.bound for nd in heap), default=INF)
    if dive:
        best_open = min(best_open, min(nd.bound for nd in dive))
    lower = min(best_open, incumbent_obj)
    if incumbent_x is None:
        if status in ("time-limit", "stopped"):
            return SolveResult(
                status="time-limit",
                bound=sgn * lower,
                nodes=nodes_done,
                wall_time=wall,
                root_lp=root_lp_result,
            )
        final = "cutoff" if cutoff is not None else "infeasible"
        return SolveResult(
            status=final,
            bound=sgn * lower,
            nodes=nodes_done,
            wall_time=wall,
            root_lp=root_lp_result,
        )

    open_nodes = bool(heap) or bool(dive)
    gap = 0.0 if not open_nodes or status == "optimal" else (incumbent_obj - lower) / max(1.0, abs(incumbent_obj))
    objective = sgn * incumbent_obj
    viol = _primal_violation(model, incumbent_x)
    return SolveResult(
        status=status,
        x=incumbent_x,
        objective=objective,
        bound=sgn * lower,
        gap=max(0.0, gap),
        nodes=nodes_done,
        iterations=total_iters,
        wall_time=wall,
        max_primal_violation=viol,
        root_lp=root_lp_result,
        incumbents=collected,
    )
