"""Compiled twin of the dictionary simplex in :mod:`rgdc.numerics`.

Same pivot rules and the same floating-point operation order as the
``_Dictionary`` class, so both paths normally return identical vertices.
Status codes: 0 optimal, 1 infeasible, 2 unbounded, 3 pivot cap hit,
4 vanishing pivot.
"""

import numpy as np
from numba import njit

OPTIMAL, INFEASIBLE, UNBOUNDED, CAP, VANISHED = 0, 1, 2, 3, 4


@njit(cache=True)
def _pivot(T, b, cost, obj0, basic, nonbasic, l, e):
    m, k = T.shape
    a = T[l, e]
    row = T[l].copy()
    col = T[:, e].copy()
    bl = b[l]
    rowa = row / a
    ba = bl / a
    for i in range(m):
        ci = col[i]
        for j in range(k):
            T[i, j] -= ci * rowa[j]
        b[i] -= ci * ba
    for j in range(k):
        T[l, j] = rowa[j]
    b[l] = ba
    for i in range(m):
        T[i, e] = -col[i] / a
    T[l, e] = 1.0 / a
    ce = cost[e]
    obj0 += ce * bl / a
    for j in range(k):
        cost[j] -= ce * row[j] / a
    cost[e] = -ce / a
    tmp = basic[l]
    basic[l] = nonbasic[e]
    nonbasic[e] = tmp
    for i in range(m):
        if b[i] < 0.0:
            b[i] = 0.0
    return obj0


@njit(cache=True)
def _optimize(T, b, cost, obj0, basic, nonbasic, iters, max_iter, opt_tol, piv_tol, degen_limit):
    m, k = T.shape
    bland = False
    degenerate = 0
    while True:
        # entering column
        e = -1
        for j in range(k):
            if cost[j] > opt_tol:
                if e < 0:
                    e = j
                elif bland:
                    if nonbasic[j] < nonbasic[e]:
                        e = j
                elif cost[j] > cost[e]:
                    e = j
        if e < 0:
            return OPTIMAL, obj0, iters
        # leaving row: minimum ratio, ties broken by Bland or largest pivot
        best = np.inf
        for i in range(m):
            if T[i, e] > piv_tol:
                r = b[i] / T[i, e]
                if r < best:
                    best = r
        if best == np.inf:
            return UNBOUNDED, obj0, iters
        lim = best + 1e-12 * (1.0 + abs(best))
        l = -1
        for i in range(m):
            if T[i, e] > piv_tol and b[i] / T[i, e] <= lim:
                if l < 0:
                    l = i
                elif bland:
                    if basic[i] < basic[l]:
                        l = i
                elif T[i, e] > T[l, e]:
                    l = i
        if iters >= max_iter:
            return CAP, obj0, iters
        if abs(T[l, e]) < piv_tol:
            return VANISHED, obj0, iters
        if b[l] <= 1e-14:
            degenerate += 1
        else:
            degenerate = 0
        if degenerate > degen_limit:
            bland = True
        obj0 = _pivot(T, b, cost, obj0, basic, nonbasic, l, e)
        iters += 1


@njit(cache=True)
def simplex(c, M, N, max_iter, feas_tol, opt_tol, piv_tol, degen_limit):
    """Two-phase simplex on ``max c'z, M z <= N`` with split free variables.

    Returns (status, iterations, basic, nonbasic, b) of the final dictionary.
    """
    m, n = M.shape
    k = 2 * n
    b = N.copy()
    basic = np.arange(k, k + m)
    nonbasic = np.arange(k)
    iters = 0
    if m > 0 and b.min() < 0.0:
        aux = k + m
        T1 = np.zeros((m, k + 1))
        T1[:, :n] = M
        T1[:, n:k] = -M
        T1[:, k] = -1.0
        cost1 = np.zeros(k + 1)
        cost1[k] = -1.0
        nb1 = np.empty(k + 1, dtype=np.int64)
        nb1[:k] = nonbasic
        nb1[k] = aux
        obj1 = _pivot(T1, b, cost1, 0.0, basic, nb1, int(np.argmin(b)), k)
        iters = 1
        st, obj1, iters = _optimize(T1, b, cost1, obj1, basic, nb1, iters, max_iter,
                                    opt_tol, piv_tol, degen_limit)
        if st != OPTIMAL:
            return st, iters, basic, nonbasic, b
        scale = 1.0 + np.abs(N).max()
        if obj1 < -feas_tol * scale:
            return INFEASIBLE, iters, basic, nonbasic, b
        for l in range(m):
            if basic[l] == aux:
                best = -1.0
                e = -1
                for j in range(k + 1):
                    if nb1[j] != aux and abs(T1[l, j]) > best:
                        best = abs(T1[l, j])
                        e = j
                obj1 = _pivot(T1, b, cost1, obj1, basic, nb1, l, e)
                iters += 1
                break
        drop = 0
        for j in range(k + 1):
            if nb1[j] == aux:
                drop = j
        T = np.empty((m, k))
        nonbasic = np.empty(k, dtype=np.int64)
        jj = 0
        for j in range(k + 1):
            if j != drop:
                T[:, jj] = T1[:, j]
                nonbasic[jj] = nb1[j]
                jj += 1
    else:
        T = np.empty((m, k))
        T[:, :n] = M
        T[:, n:] = -M

    full_cost = np.empty(k)
    full_cost[:n] = c
    full_cost[n:] = -c
    cost = np.zeros(k)
    obj0 = 0.0
    for j in range(k):
        if nonbasic[j] < k:
            cost[j] = full_cost[nonbasic[j]]
    for i in range(m):
        if basic[i] < k:
            ci = full_cost[basic[i]]
            obj0 += ci * b[i]
            for j in range(k):
                cost[j] -= ci * T[i, j]
    st, obj0, iters = _optimize(T, b, cost, obj0, basic, nonbasic, iters, max_iter,
                                opt_tol, piv_tol, degen_limit)
    return st, iters, basic, nonbasic, b
