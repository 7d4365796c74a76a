"""Hot numeric kernels.

Each kernel is written as a plain numpy function and JIT-compiled with numba
unless the environment variable ``AUTOCARRIER_NO_NUMBA`` is set (or numba is
unavailable), in which case the pure-numpy path runs unchanged.  Run
``benchmarks/bench_kernels.py`` to compare the two paths.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "simplex_core",
    "lk_pass",
    "haversine_matrix",
    "SPX_OPTIMAL",
    "SPX_INFEASIBLE",
    "SPX_UNBOUNDED",
    "SPX_ITER_LIMIT",
]

SPX_OPTIMAL = 0
SPX_INFEASIBLE = 1
SPX_UNBOUNDED = 2
SPX_ITER_LIMIT = 3

_REFACTOR_EVERY = 64
_BLAND_AFTER = 120  # consecutive degenerate pivots before Bland's rule kicks in


def _simplex_core(A, b, c, lb, ub, basis, at_upper, warm, tol, maxiter):
    """Bounded-variable two-phase revised simplex on equality-form rows.

    A must carry one slack column per row as its trailing m columns.  `basis`
    and `at_upper` are taken as the starting point when `warm` is nonzero and
    are left holding the final basis for reuse.  Returns
    (status, x, y, obj, iterations).
    """
    m, n = A.shape
    inf = np.inf

    pos = np.full(n, -1, np.int64)
    if warm == 0:
        for i in range(m):
            basis[i] = n - m + i
        for j in range(n):
            at_upper[j] = 0
            if lb[j] == -inf and ub[j] < inf:
                at_upper[j] = 1
    for i in range(m):
        pos[basis[i]] = i

    # nonbasic resting values
    xn = np.zeros(n)
    for j in range(n):
        if pos[j] >= 0:
            continue
        if at_upper[j] == 1 and ub[j] < inf:
            xn[j] = ub[j]
        elif lb[j] > -inf:
            xn[j] = lb[j]
            at_upper[j] = 0
        elif ub[j] < inf:
            xn[j] = ub[j]
            at_upper[j] = 1
        else:
            xn[j] = 0.0

    B = np.empty((m, m))
    for i in range(m):
        B[:, i] = A[:, basis[i]]
    binv = np.linalg.inv(B)
    chk = np.dot(binv, B)
    bad = False
    for i in range(m):
        for k in range(m):
            t = chk[i, k] - (1.0 if i == k else 0.0)
            if t > 1e-6 or t < -1e-6:
                bad = True
    if bad:
        # singular warm basis: fall back to the slack basis
        for i in range(m):
            pos[basis[i]] = -1
        for i in range(m):
            basis[i] = n - m + i
            pos[basis[i]] = i
        for i in range(m):
            B[:, i] = A[:, basis[i]]
        binv = np.linalg.inv(B)
        for j in range(n):
            if pos[j] >= 0:
                continue
            if lb[j] > -inf:
                xn[j] = lb[j]
                at_upper[j] = 0
            elif ub[j] < inf:
                xn[j] = ub[j]
                at_upper[j] = 1
            else:
                xn[j] = 0.0

    r = b.copy()
    for j in range(n):
        if pos[j] < 0 and xn[j] != 0.0:
            r -= A[:, j] * xn[j]
    xb = np.dot(binv, r)

    niter = 0
    since_refactor = 0
    degenerate_run = 0
    phase = 1
    status = SPX_ITER_LIMIT

    while niter < maxiter:
        # phase-1 gradient: push violated basics toward their bounds
        gamma = np.zeros(m)
        infeas = 0.0
        for i in range(m):
            bj = basis[i]
            if xb[i] < lb[bj] - tol:
                gamma[i] = -1.0
                infeas += lb[bj] - xb[i]
            elif xb[i] > ub[bj] + tol:
                gamma[i] = 1.0
                infeas += xb[i] - ub[bj]
        if phase == 1 and infeas <= tol:
            phase = 2
        if phase == 2 and infeas > 1e-7:
            phase = 1

        if phase == 1:
            y = np.dot(gamma, binv)
        else:
            cb = np.empty(m)
            for i in range(m):
                cb[i] = c[basis[i]]
            y = np.dot(cb, binv)

        # pricing
        d = np.dot(y, A)
        enter = -1
        best = tol
        use_bland = degenerate_run > _BLAND_AFTER
        for j in range(n):
            if pos[j] >= 0:
                continue
            if phase == 1:
                dj = -d[j]
            else:
                dj = c[j] - d[j]
            viol = 0.0
            if at_upper[j] == 0:
                if dj < -tol and xn[j] < ub[j]:
                    viol = -dj
            else:
                if dj > tol and xn[j] > lb[j]:
                    viol = dj
            if viol > 0.0:
                if use_bland:
                    enter = j
                    break
                if viol > best:
                    best = viol
                    enter = j

        if enter < 0:
            if phase == 1:
                status = SPX_INFEASIBLE
                break
            status = SPX_OPTIMAL
            break

        sigma = 1.0 if at_upper[enter] == 0 else -1.0
        w = np.dot(binv, np.ascontiguousarray(A[:, enter]))

        # bounded ratio test with phase-1 breakpoints; a basic moving away
        # from a bound it already violates has no breakpoint in that direction
        limit = ub[enter] - lb[enter]
        leave = -1
        leave_to_upper = 0
        for i in range(m):
            delta = -sigma * w[i]
            bj = basis[i]
            blocked = False
            target = 0.0
            hit_upper = 0
            if delta > tol:
                if xb[i] < lb[bj] - tol:
                    target = lb[bj]
                    hit_upper = 0
                    blocked = True
                elif xb[i] <= ub[bj] + tol and ub[bj] < inf:
                    target = ub[bj]
                    hit_upper = 1
                    blocked = True
            elif delta < -tol:
                if xb[i] > ub[bj] + tol:
                    target = ub[bj]
                    hit_upper = 1
                    blocked = True
                elif xb[i] >= lb[bj] - tol and lb[bj] > -inf:
                    target = lb[bj]
                    hit_upper = 0
                    blocked = True
            if blocked:
                ratio = (target - xb[i]) / delta
                if ratio < 0.0:
                    ratio = 0.0
                if ratio < limit - 1e-12:
                    limit = ratio
                    leave = i
                    leave_to_upper = hit_upper

        if limit == inf:
            if phase == 1:
                status = SPX_INFEASIBLE
            else:
                status = SPX_UNBOUNDED
            break

        step = limit
        if step < 0.0:
            step = 0.0
        if step <= tol:
            degenerate_run += 1
        else:
            degenerate_run = 0

        if leave < 0:
            # entering variable flips to its opposite bound
            xb -= (sigma * step) * w
            at_upper[enter] = 1 - at_upper[enter]
            xn[enter] = ub[enter] if at_upper[enter] == 1 else lb[enter]
        else:
            xb -= (sigma * step) * w
            out = basis[leave]
            pos[out] = -1
            at_upper[out] = leave_to_upper
            xn[out] = ub[out] if leave_to_upper == 1 else lb[out]
            entering_value = xn[enter] + sigma * step
            basis[leave] = enter
            pos[enter] = leave
            xb[leave] = entering_value
            piv = w[leave]
            binv_l = binv[leave] / piv
            for i in range(m):
                if i != leave and w[i] != 0.0:
                    binv[i] -= w[i] * binv_l
            binv[leave] = binv_l
            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                for i in range(m):
                    B[:, i] = A[:, basis[i]]
                binv = np.linalg.inv(B)
                r = b.copy()
                for j in range(n):
                    if pos[j] < 0 and xn[j] != 0.0:
                        r -= A[:, j] * xn[j]
                xb = np.dot(binv, r)
                since_refactor = 0
        niter += 1

    x = xn.copy()
    for i in range(m):
        x[basis[i]] = xb[i]
    cb2 = np.empty(m)
    for i in range(m):
        cb2[i] = c[basis[i]]
    y_out = np.dot(cb2, binv)
    obj = float(np.dot(c, x))
    return status, x, y_out, obj, niter


def _lk_pass(path, D):
    """One local-search sweep for an open path with both endpoints fixed:
    first-improvement 2-opt plus Or-opt segment relocation (lengths 1..3,
    both orientations).  Returns 1 if the path improved."""
    n = path.shape[0]
    improved = 0
    if n < 4:
        return improved

    # 2-opt: reverse path[i..j], endpoints stay put
    for i in range(1, n - 2):
        for j in range(i + 1, n - 1):
            a = path[i - 1]
            p = path[i]
            q = path[j]
            z = path[j + 1]
            delta = D[a, q] + D[p, z] - D[a, p] - D[q, z]
            if delta < -1e-12:
                lo = i
                hi = j
                while lo < hi:
                    t = path[lo]
                    path[lo] = path[hi]
                    path[hi] = t
                    lo += 1
                    hi -= 1
                improved = 1

    # Or-opt: relocate a short segment elsewhere, forward or reversed
    for seg in range(1, 4):
        i = 1
        while i + seg - 1 <= n - 2:
            a = path[i - 1]
            s0 = path[i]
            s1 = path[i + seg - 1]
            z = path[i + seg]
            removal = D[a, s0] + D[s1, z] - D[a, z]
            best_gain = -1e-12
            best_j = -1
            best_rev = 0
            j = 0
            while j <= n - 2:
                if i - 1 <= j <= i + seg - 1:
                    j += 1
                    continue
                u = path[j]
                v = path[j + 1]
                ins_f = D[u, s0] + D[s1, v] - D[u, v]
                if ins_f - removal < best_gain:
                    best_gain = ins_f - removal
                    best_j = j
                    best_rev = 0
                ins_r = D[u, s1] + D[s0, v] - D[u, v]
                if ins_r - removal < best_gain:
                    best_gain = ins_r - removal
                    best_j = j
                    best_rev = 1
                j += 1
            if best_j >= 0:
                seg_nodes = np.empty(seg, path.dtype)
                for t in range(seg):
                    if best_rev == 1:
                        seg_nodes[t] = path[i + seg - 1 - t]
                    else:
                        seg_nodes[t] = path[i + t]
                rest = np.empty(n - seg, path.dtype)
                k = 0
                for t in range(n):
                    if t < i or t >= i + seg:
                        rest[k] = path[t]
                        k += 1
                # best_j indexes the original path; find u in rest
                u = path[best_j]
                upos = 0
                for t in range(n - seg):
                    if rest[t] == u:
                        upos = t
                        break
                k = 0
                for t in range(upos + 1):
                    path[k] = rest[t]
                    k += 1
                for t in range(seg):
                    path[k] = seg_nodes[t]
                    k += 1
                for t in range(upos + 1, n - seg):
                    path[k] = rest[t]
                    k += 1
                improved = 1
            else:
                i += 1

    # 3-opt: the four reconnections not reachable by a single 2-opt move,
    # on segments B = path[i..j-1], C = path[j..k-1]
    for i in range(1, n - 2):
        for j in range(i + 1, n - 1):
            for k in range(j + 1, n):
                a = path[i - 1]
                bnode = path[i]
                cnode = path[j - 1]
                dnode = path[j]
                enode = path[k - 1]
                fnode = path[k]
                base = D[a, bnode] + D[cnode, dnode] + D[enode, fnode]
                d4 = D[a, cnode] + D[bnode, enode] + D[dnode, fnode] - base
                d5 = D[a, dnode] + D[enode, bnode] + D[cnode, fnode] - base
                d6 = D[a, dnode] + D[enode, cnode] + D[bnode, fnode] - base
                d7 = D[a, enode] + D[dnode, bnode] + D[cnode, fnode] - base
                choice = 0
                bestd = -1e-12
                if d4 < bestd:
                    bestd = d4
                    choice = 4
                if d5 < bestd:
                    bestd = d5
                    choice = 5
                if d6 < bestd:
                    bestd = d6
                    choice = 6
                if d7 < bestd:
                    bestd = d7
                    choice = 7
                if choice == 0:
                    continue
                nb = j - i
                nc = k - j
                segb = np.empty(nb, path.dtype)
                segc = np.empty(nc, path.dtype)
                for t in range(nb):
                    segb[t] = path[i + t]
                for t in range(nc):
                    segc[t] = path[j + t]
                p = i
                if choice == 4:  # B' C'
                    for t in range(nb):
                        path[p] = segb[nb - 1 - t]
                        p += 1
                    for t in range(nc):
                        path[p] = segc[nc - 1 - t]
                        p += 1
                elif choice == 5:  # C B
                    for t in range(nc):
                        path[p] = segc[t]
                        p += 1
                    for t in range(nb):
                        path[p] = segb[t]
                        p += 1
                elif choice == 6:  # C B'
                    for t in range(nc):
                        path[p] = segc[t]
                        p += 1
                    for t in range(nb):
                        path[p] = segb[nb - 1 - t]
                        p += 1
                else:  # C' B
                    for t in range(nc):
                        path[p] = segc[nc - 1 - t]
                        p += 1
                    for t in range(nb):
                        path[p] = segb[t]
                        p += 1
                improved = 1
    return improved


def _haversine_matrix(lat, lon, radius):
    """Pairwise great-circle distances for radian coordinate vectors."""
    n = lat.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        out[i, i] = 0.0
        for j in range(i + 1, n):
            sdlat = np.sin((lat[j] - lat[i]) * 0.5)
            sdlon = np.sin((lon[j] - lon[i]) * 0.5)
            h = sdlat * sdlat + sdlon * sdlon * np.cos(lat[i]) * np.cos(lat[j])
            if h > 1.0:
                h = 1.0
            d = 2.0 * radius * np.arcsin(np.sqrt(h))
            out[i, j] = d
            out[j, i] = d
    return out


def _want_numba() -> bool:
    if os.environ.get("AUTOCARRIER_NO_NUMBA", ""):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _want_numba()

if NUMBA_ENABLED:
    from numba import njit

    simplex_core = njit(cache=True)(_simplex_core)
    lk_pass = njit(cache=True)(_lk_pass)
    haversine_matrix = njit(cache=True)(_haversine_matrix)
else:
    simplex_core = _simplex_core
    lk_pass = _lk_pass
    haversine_matrix = _haversine_matrix
