"""Dense numerics: matrix validation, zero-order-hold discretization and a
small two-phase simplex solver for the redundancy and kappa linear programs.

The LP sizes met in this package are tiny in the number of variables (a
handful) but can carry several hundred rows, so the solver works on the
compact (dictionary) tableau whose width is the number of structural
variables rather than the number of rows.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
PIVOT_TOL = 1e-12
# consecutive degenerate pivots tolerated before switching to Bland's rule
_DEGENERATE_LIMIT = 25

# "auto" uses the compiled simplex kernel when numba imports; "python" forces
# the reference implementation (both follow the same pivot rules)
LP_ENGINE = "auto"


class LpSolverError(RuntimeError):
    """The simplex iteration broke down numerically (not an infeasibility)."""


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


def as_matrix(a, name="matrix", shape=None):
    """Return `a` as a finite 2-D float array, raising ValueError otherwise.

    Scalars become 1x1 and 1-D input becomes a single row.
    """
    arr = np.array(a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got {arr.ndim}-D")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    if shape is not None:
        for want, got in zip(shape, arr.shape):
            if want is not None and want != got:
                raise ValueError(f"{name} has shape {arr.shape}, expected {shape}")
    return arr


def as_vector(a, name="vector", size=None):
    arr = np.array(a, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    if size is not None and arr.size != size:
        raise ValueError(f"{name} has length {arr.size}, expected {size}")
    return arr


@dataclass(frozen=True)
class LpProblem:
    """``sense c'z`` subject to ``M z (<= | >=) N`` with z free."""

    c: np.ndarray
    M: np.ndarray
    N: np.ndarray
    sense: str = "max"
    constraint_sense: str = "<="

    def __post_init__(self):
        M = as_matrix(self.M, "M")
        c = as_vector(self.c, "c")
        N = as_vector(self.N, "N")
        if c.size != M.shape[1]:
            raise ValueError(f"objective length {c.size} != M.cols {M.shape[1]}")
        if N.size != M.shape[0]:
            raise ValueError(f"rhs length {N.size} != M.rows {M.shape[0]}")
        if self.sense not in ("max", "min"):
            raise ValueError(f"sense must be 'max' or 'min', got {self.sense!r}")
        if self.constraint_sense not in ("<=", ">="):
            raise ValueError(f"constraint_sense must be '<=' or '>=', got {self.constraint_sense!r}")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "N", N)


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    z: np.ndarray | None = None
    f: float | None = None
    iterations: int = field(default=0, compare=False)

    @property
    def optimal(self):
        return self.status is LpStatus.OPTIMAL


def solve_lp(problem: LpProblem) -> LpResult:
    """Solve an LP with free variables by dense two-phase simplex."""
    if problem.sense == "min" and problem.constraint_sense == ">=":
        return solve_lp_min_geq(problem)
    M, N = problem.M, problem.N
    if problem.constraint_sense == ">=":
        M, N = -M, -N
    if problem.sense == "max":
        return _solve_max_leq(problem.c, M, N)
    res = _solve_max_leq(-problem.c, M, N)
    if res.optimal:
        return LpResult(res.status, res.z, -res.f, res.iterations)
    return res


def solve_max_leq_unchecked(c, M, N) -> LpResult:
    """``max c'z s.t. M z <= N`` on float arrays already known to be consistent.

    Skips the :class:`LpProblem` validation; meant for the inner loops of the
    set constructions.
    """
    return _solve_max_leq(c, M, N)


def solve_lp_min_geq(problem: LpProblem) -> LpResult:
    """Solve ``min c'z s.t. M z >= N`` by reflecting z -> -z.

    With z = -w the problem reads ``max c'w s.t. M w <= -N``, so the minimizer
    is the negated maximizer and the optimal value is its negation.
    """
    if problem.sense != "min" or problem.constraint_sense != ">=":
        raise ValueError("solve_lp_min_geq needs sense='min' and constraint_sense='>='")
    res = _solve_max_leq(problem.c, problem.M, -problem.N)
    if res.optimal:
        return LpResult(res.status, -res.z, -res.f, res.iterations)
    return res


def _solve_max_leq(c, M, N):
    m, n = M.shape
    if m == 0:
        if np.any(c != 0):
            return LpResult(LpStatus.UNBOUNDED)
        return LpResult(LpStatus.OPTIMAL, np.zeros(n), 0.0)

    # equilibrate rows then columns; the optimizer is mapped back at the end
    row_norm = np.abs(M).max(axis=1)
    zero_rows = row_norm == 0.0
    if np.any(N[zero_rows] < -FEAS_TOL * (1.0 + np.abs(N[zero_rows]))):
        return LpResult(LpStatus.INFEASIBLE)
    keep = ~zero_rows
    Ms = M[keep] / row_norm[keep, None]
    Ns = N[keep] / row_norm[keep]
    col_norm = np.abs(Ms).max(axis=0) if Ms.shape[0] else np.zeros(n)
    free_cols = col_norm == 0.0
    if np.any(np.abs(c[free_cols]) > 0.0):
        # objective moves along a direction no row restricts
        if _feasible_ignoring(Ms, Ns):
            return LpResult(LpStatus.UNBOUNDED)
        return LpResult(LpStatus.INFEASIBLE)
    col_scale = np.where(free_cols, 1.0, 1.0 / np.where(free_cols, 1.0, col_norm))
    Ms = Ms * col_scale
    cs = c * col_scale

    status, zs, iters, vertex = _tableau_simplex(cs, Ms, Ns)
    if status is not LpStatus.OPTIMAL:
        return LpResult(status, iterations=iters)
    z = zs * col_scale
    z = _polish(z, M[keep], N[keep], *vertex)
    return LpResult(LpStatus.OPTIMAL, z, float(c @ z), iters)


def _feasible_ignoring(Ms, Ns):
    if Ms.shape[0] == 0:
        return True
    return _tableau_simplex(np.zeros(Ms.shape[1]), Ms, Ns)[0] is LpStatus.OPTIMAL


class _Dictionary:
    """Compact simplex tableau: x_B = b - T x_N, objective = obj0 + cost . x_N."""

    def __init__(self, T, b, cost, nonbasic, basic):
        self.T = T
        self.b = b
        self.cost = cost
        self.obj0 = 0.0
        self.nonbasic = nonbasic
        self.basic = basic
        self.iterations = 0
        self.bland = False

    def pivot(self, l, e):
        T, b = self.T, self.b
        a = T[l, e]
        row = T[l].copy()
        col = T[:, e].copy()
        bl = b[l]
        T -= np.outer(col, row / a)
        b -= col * (bl / a)
        T[l] = row / a
        b[l] = bl / a
        T[:, e] = -col / a
        T[l, e] = 1.0 / a
        ce = self.cost[e]
        self.obj0 += ce * bl / a
        self.cost -= ce * row / a
        self.cost[e] = -ce / a
        self.basic[l], self.nonbasic[e] = self.nonbasic[e], self.basic[l]
        np.maximum(b, 0.0, out=b)
        self.iterations += 1

    def choose_entering(self):
        cand = np.flatnonzero(self.cost > OPT_TOL)
        if cand.size == 0:
            return None
        if self.bland:
            return cand[np.argmin(self.nonbasic[cand])]
        return cand[np.argmax(self.cost[cand])]

    def choose_leaving(self, e):
        col = self.T[:, e]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return None
        ratios = self.b[rows] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        if self.bland:
            return ties[np.argmin(self.basic[ties])]
        return ties[np.argmax(col[ties])]

    def optimize(self, max_iter):
        degenerate = 0
        while True:
            e = self.choose_entering()
            if e is None:
                return LpStatus.OPTIMAL
            l = self.choose_leaving(e)
            if l is None:
                return LpStatus.UNBOUNDED
            if self.iterations >= max_iter:
                raise LpSolverError(f"simplex exceeded {max_iter} pivots")
            if abs(self.T[l, e]) < PIVOT_TOL:
                raise LpSolverError("pivot element vanished")
            degenerate = degenerate + 1 if self.b[l] <= 1e-14 else 0
            if degenerate > _DEGENERATE_LIMIT:
                self.bland = True
            self.pivot(l, e)


def _tableau_simplex(c, M, N):
    """Dispatch to the compiled kernel when numba imports, else to Python."""
    if _lp_kernel() is None:
        return _tableau_simplex_py(c, M, N)
    return _tableau_simplex_compiled(c, M, N)


_KERNEL = []


def _lp_kernel():
    if not _KERNEL:
        try:
            from ._fastlp import simplex
        except ImportError:
            simplex = None
        _KERNEL.append(simplex)
    return _KERNEL[0] if LP_ENGINE != "python" else None


def _tableau_simplex_compiled(c, M, N):
    m, n = M.shape
    k = 2 * n
    code, iters, basic, nonbasic, b = _lp_kernel()(
        np.ascontiguousarray(c, dtype=float), np.ascontiguousarray(M, dtype=float),
        np.ascontiguousarray(N, dtype=float), 50 * (m + k) + 200,
        FEAS_TOL, OPT_TOL, PIVOT_TOL, _DEGENERATE_LIMIT)
    if code == 3:
        raise LpSolverError(f"simplex exceeded {50 * (m + k) + 200} pivots")
    if code == 4:
        raise LpSolverError("pivot element vanished")
    if code != 0:
        return (LpStatus.INFEASIBLE if code == 1 else LpStatus.UNBOUNDED), None, iters, None
    return (LpStatus.OPTIMAL, *_vertex_parts(basic, nonbasic, b, n, m, iters))


def _vertex_parts(basic, nonbasic, b, n, m, iters):
    k = 2 * n
    vals = np.zeros(k + m)
    vals[basic] = b
    z = vals[:n] - vals[n:k]
    # tight rows (nonbasic slacks) and free variables pinned at zero
    active = np.sort(nonbasic[nonbasic >= k] - k)
    nb = set(nonbasic.tolist())
    fixed = np.array([j for j in range(n) if j in nb and (j + n) in nb], dtype=int)
    return z, iters, (active, fixed)


def _tableau_simplex_py(c, M, N):
    m, n = M.shape
    k = 2 * n
    T = np.hstack([M, -M])
    b = N.astype(float).copy()
    full_cost = np.concatenate([c, -c])
    nonbasic = np.arange(k)
    basic = np.arange(k, k + m)
    max_iter = 50 * (m + k) + 200

    if b.min() < 0.0:
        aux = k + m
        d = _Dictionary(
            np.hstack([T, -np.ones((m, 1))]),
            b,
            np.concatenate([np.zeros(k), [-1.0]]),
            np.append(nonbasic, aux),
            basic,
        )
        d.pivot(int(np.argmin(b)), k)
        d.optimize(max_iter)
        scale = 1.0 + np.abs(N).max()
        if d.obj0 < -FEAS_TOL * scale:
            return LpStatus.INFEASIBLE, None, d.iterations, None
        where = np.flatnonzero(d.basic == aux)
        if where.size:
            l = where[0]
            row = np.abs(d.T[l])
            row[d.nonbasic == aux] = 0.0
            d.pivot(l, int(np.argmax(row)))
        drop = int(np.flatnonzero(d.nonbasic == aux)[0])
        T = np.delete(d.T, drop, axis=1)
        nonbasic = np.delete(d.nonbasic, drop)
        basic = d.basic
        b = d.b
        iters = d.iterations
    else:
        iters = 0

    # express the original objective in terms of the current nonbasic set
    cost = np.zeros(k)
    obj0 = 0.0
    structural = nonbasic < k
    cost[structural] = full_cost[nonbasic[structural]]
    for i in np.flatnonzero(basic < k):
        ci = full_cost[basic[i]]
        obj0 += ci * b[i]
        cost -= ci * T[i]
    d = _Dictionary(T, b, cost, nonbasic, basic)
    d.obj0 = obj0
    d.iterations = iters
    status = d.optimize(max_iter)
    if status is not LpStatus.OPTIMAL:
        return status, None, d.iterations, None

    return (LpStatus.OPTIMAL, *_vertex_parts(d.basic, d.nonbasic, d.b, n, m, d.iterations))


def _polish(z, M, N, active, fixed):
    """Recompute the optimal vertex from its defining rows in original scale."""
    n = M.shape[1]
    if active.size + fixed.size < n:
        return z
    E = np.zeros((fixed.size, n))
    E[np.arange(fixed.size), fixed] = 1.0
    lhs = np.vstack([M[active], E])
    rhs = np.concatenate([N[active], np.zeros(fixed.size)])
    if lhs.shape[0] == n:
        try:
            sol = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError:
            return z
    else:
        sol, _, rank, _ = np.linalg.lstsq(lhs, rhs, rcond=None)
        if rank < n:
            return z
    if not np.all(np.isfinite(sol)):
        return z
    scale = 1.0 + np.abs(N)
    viol_raw = np.max((M @ z - N) / scale)
    viol_pol = np.max((M @ sol - N) / scale)
    return sol if viol_pol <= max(viol_raw, 1e-12) else z


def zoh_discretize(A_cont, B_cont, Ts):
    """Zero-order-hold discretization through the augmented matrix exponential.

    ``expm([[A, B], [0, 0]] * Ts) = [[Ad, Bd], [0, I]]``.
    """
    A_cont = as_matrix(A_cont, "A_cont")
    n = A_cont.shape[0]
    if A_cont.shape[1] != n:
        raise ValueError(f"A_cont must be square, got {A_cont.shape}")
    B_cont = np.array(B_cont, dtype=float).reshape(n, -1)
    if not np.all(np.isfinite(B_cont)):
        raise ValueError("B_cont contains NaN or Inf")
    if not Ts > 0:
        raise ValueError(f"Ts must be positive, got {Ts}")
    m = B_cont.shape[1]
    aug = np.zeros((n + m, n + m))
    aug[:n, :n] = A_cont
    aug[:n, n:] = B_cont
    E = expm(aug * Ts)
    return E[:n, :n], E[:n, n:]


def spectral_radius(A):
    return float(np.max(np.abs(np.linalg.eigvals(A)))) if np.size(A) else 0.0
