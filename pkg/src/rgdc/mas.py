"""Maximal admissible sets (MAS) for stable discrete-time LTI systems driven by
a constant input v.

A set is stored as rows ``H_x x + H_v v <= scale * h``. Rows carry a tag
``(t, source_row)``: the prediction time the row constrains (``-1`` for the
tightened steady-state rows) and the constraint row it was derived from.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .numerics import (
    FEAS_TOL,
    LpProblem,
    LpStatus,
    as_matrix,
    as_vector,
    solve_lp,
    solve_lp_min_geq,
    solve_max_leq_unchecked,
    spectral_radius,
)

DEFAULT_EPSILON = 1e-3
DEFAULT_MAX_INDEX = 10_000
DEFAULT_MAX_DEPTH = 5_000
REDUNDANCY_TOL = 1e-9
MEMBERSHIP_TOL = 1e-9
TIE_TOL = 1e-9
STEADY_STATE_T = -1

# constraint generation in redundancy LPs: used above this many rows
_CG_MIN_ROWS = 48
_CG_SEED_ROWS = 16
_CG_ADD_ROWS = 8
_CG_BOX = 1e6


class MasConstructionError(RuntimeError):
    """The constraint set is inconsistent (empty) or cannot be represented."""


class NonTerminationError(MasConstructionError):
    """Finite determination was not reached within the configured cap."""


@dataclass(frozen=True)
class DiscreteLtiSystem:
    """x(t+1) = A x + B v,  y_tr = C_tr x,  y_st = C_st x + D_st v."""

    A: np.ndarray
    B: np.ndarray
    C_tr: np.ndarray
    C_st: np.ndarray | None = None
    D_st: np.ndarray | None = None
    Ts: float = 1.0

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        B = as_matrix(np.reshape(self.B, (n, 1)), "B", (n, 1))
        C_tr = as_matrix(self.C_tr, "C_tr", (1, n))
        C_st = np.zeros((0, n)) if self.C_st is None else as_matrix(self.C_st, "C_st", (None, n))
        p = C_st.shape[0]
        D_st = np.zeros((p, 1)) if self.D_st is None else as_matrix(np.reshape(self.D_st, (p, 1)), "D_st")
        if not self.Ts > 0:
            raise ValueError(f"Ts must be positive, got {self.Ts}")
        for name, val in (("A", A), ("B", B), ("C_tr", C_tr), ("C_st", C_st), ("D_st", D_st)):
            object.__setattr__(self, name, val)
        object.__setattr__(self, "Ts", float(self.Ts))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.C_st.shape[0]

    def spectral_radius(self):
        return spectral_radius(self.A)

    def steady_state_gain(self):
        """(I - A)^-1 B as a length-n vector: the equilibrium state per unit v."""
        return np.linalg.solve(np.eye(self.n) - self.A, self.B).ravel()

    def dc_gain_tr(self):
        return float((self.C_tr @ self.steady_state_gain())[0])

    def check(self, tol=1e-9):
        """Return {check name: passed} for stability and unit tracking DC gain."""
        rho = self.spectral_radius()
        checks = {"stable": rho < 1.0}
        try:
            checks["dc_gain_one"] = rho < 1.0 and abs(self.dc_gain_tr() - 1.0) <= tol
        except np.linalg.LinAlgError:
            checks["dc_gain_one"] = False
        return checks

    def require_stable(self):
        rho = self.spectral_radius()
        if not rho < 1.0:
            raise MasConstructionError(f"system is not asymptotically stable (spectral radius {rho:.6g})")


@dataclass(frozen=True)
class ConstraintSet:
    """Static output constraints S y_st <= s."""

    S: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim == 1:
            S = S.reshape(-1, 1)
        s = as_vector(self.s, "s")
        if S.ndim != 2 or S.shape[0] != s.size:
            raise ValueError(f"S {S.shape} and s ({s.size},) disagree")
        if S.shape[0] == 0:
            raise ValueError("constraint set has no rows")
        if not np.all(np.isfinite(S)):
            raise ValueError("S contains NaN or Inf")
        if np.any(np.all(S == 0.0, axis=1)):
            raise ValueError("constraint rows of S must be nonzero")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "s", s)

    @classmethod
    def box(cls, lower, upper):
        """lower <= y <= upper elementwise."""
        lower = as_vector(lower, "lower")
        upper = as_vector(upper, "upper", lower.size)
        eye = np.eye(lower.size)
        return cls(np.vstack([eye, -eye]), np.concatenate([upper, -lower]))


@dataclass(frozen=True)
class MasRepresentation:
    H_x: np.ndarray
    H_v: np.ndarray
    h: np.ndarray
    admissibility_index: int
    epsilon: float
    row_t: np.ndarray
    row_source: np.ndarray
    orientation: str = "<="

    def __post_init__(self):
        m = len(self.h)
        if self.H_x.shape[0] != m or self.H_v.shape[0] != m or len(self.row_t) != m:
            raise ValueError("H_x, H_v, h and row tags must have equal row counts")

    @property
    def n_rows(self):
        return len(self.h)

    @property
    def steady_state_rows(self):
        return np.flatnonzero(self.row_t == STEADY_STATE_T)

    @property
    def H(self):
        """[H_x, H_v] stacked as one matrix."""
        return np.hstack([self.H_x, self.H_v[:, None]])


@dataclass(frozen=True)
class DynamicMasPair:
    """The two constant representations that serve every case of the dynamic MAS.

    ``rep_minus`` is built at r = 1 (rows ``<= 1 * h_minus``), ``rep_plus`` at
    r = -1 (rows ``<= -1 * h_plus``).
    """

    rep_minus: MasRepresentation
    rep_plus: MasRepresentation


@dataclass(frozen=True)
class UncertainSystem:
    vertex_systems: tuple
    nominal_index: int = 0

    def __post_init__(self):
        verts = tuple(self.vertex_systems)
        if not verts:
            raise ValueError("need at least one vertex system")
        ref = verts[0]
        for sys in verts[1:]:
            if sys.A.shape != ref.A.shape or sys.p != ref.p:
                raise ValueError("vertex systems must share dimensions")
            if not (np.array_equal(sys.C_tr, ref.C_tr) and np.array_equal(sys.C_st, ref.C_st)
                    and np.array_equal(sys.D_st, ref.D_st)):
                raise ValueError("vertex systems must share output matrices")
        if not 0 <= self.nominal_index < len(verts):
            raise ValueError("nominal_index out of range")
        object.__setattr__(self, "vertex_systems", verts)

    @property
    def nominal(self):
        return self.vertex_systems[self.nominal_index]


class DynamicSelection(NamedTuple):
    rep: MasRepresentation
    orientation: str
    rhs_scale: float
    case: str


def prediction_row(sys: DiscreteLtiSystem, S_row, t, C=None, D=None):
    """Coefficients of ``S_row . y(t)`` in terms of (x(0), v) for constant v.

    ``y(t) = C A^t x + (C (I - A^t)(I - A)^-1 B + D) v``. By default C/D are
    the tracking output (D = 0); pass C_st/D_st for the constrained outputs.
    """
    if t < 0:
        raise ValueError("prediction time must be >= 0")
    C = sys.C_tr if C is None else np.atleast_2d(C)
    D = np.zeros((C.shape[0], 1)) if D is None else np.reshape(D, (C.shape[0], 1))
    S_row = np.atleast_1d(np.asarray(S_row, dtype=float))
    g_x = S_row @ C
    coeff_x = g_x @ np.linalg.matrix_power(sys.A, t)
    x_ss = sys.steady_state_gain()
    coeff_v = float(g_x @ x_ss - coeff_x @ x_ss + S_row @ D.ravel())
    return coeff_x, coeff_v


def _redundancy_value(H, rhs, c, threshold=None):
    """max c.z over {H z <= rhs}; +inf when unbounded.

    Large row sets go through constraint generation: the LP is solved on the
    rows best aligned with c inside a wide artificial box, the most violated
    rows are added and it is solved again until the optimizer satisfies every
    row. While the box is slack, each relaxed value bounds the true maximum
    from above; once the optimizer satisfies every row it bounds it from
    below. With ``threshold`` given the search stops as soon as either bound
    settles which side of the threshold the maximum lies on, and the returned
    value is only guaranteed to lie on that same side.
    """
    m = len(rhs)
    if m <= _CG_MIN_ROWS:
        return _redundancy_value_full(H, rhs, c)
    norms = np.linalg.norm(H, axis=1)
    norms = np.where(norms > 0, norms, 1.0)
    chosen = np.zeros(m, dtype=bool)
    chosen[np.argsort(-(H @ c) / norms, kind="stable")[:_CG_SEED_ROWS]] = True
    slack_tol = FEAS_TOL * (1.0 + np.abs(rhs))
    k = H.shape[1]
    radius = _CG_BOX * (1.0 + np.max(np.abs(rhs)))
    box_H = np.vstack([np.eye(k), -np.eye(k)])
    box_h = np.full(2 * k, radius)
    while True:
        res = solve_max_leq_unchecked(c, np.vstack([H[chosen], box_H]), np.concatenate([rhs[chosen], box_h]))
        if res.status is LpStatus.INFEASIBLE:
            raise MasConstructionError("partially constructed set is empty: constraints are inconsistent")
        on_box = np.max(np.abs(res.z)) >= 0.5 * radius
        if threshold is not None and not on_box and res.f <= threshold:
            return res.f
        excess = (H @ res.z - rhs - slack_tol) / norms
        excess[chosen] = -np.inf
        worst = np.argsort(-excess, kind="stable")[:_CG_ADD_ROWS]
        worst = worst[excess[worst] > 0]
        if worst.size == 0:
            if not on_box or (threshold is not None and res.f > threshold):
                return res.f
            # optimum sits on the artificial box: unbounded or very far away
            return _redundancy_value_full(H, rhs, c)
        chosen[worst] = True


def _redundancy_value_full(H, rhs, c):
    res = solve_max_leq_unchecked(c, H, rhs)
    if res.status is LpStatus.INFEASIBLE:
        raise MasConstructionError("partially constructed set is empty: constraints are inconsistent")
    if res.status is LpStatus.UNBOUNDED:
        return np.inf
    return res.f


def _is_redundant_leq(H, rhs, c, d):
    limit = d + REDUNDANCY_TOL * (1.0 + abs(d))
    return _redundancy_value(H, rhs, c, limit) <= limit


def is_redundant(partial: MasRepresentation, coeffs, bound, orientation="<=", rhs_scale=1.0):
    """Whether ``coeffs . (x, v) <= bound`` (or ``>=``) is implied by the set.

    The set is ``H z <= rhs_scale * h`` for the ``<=`` orientation and
    ``H z >= rhs_scale * h`` otherwise. Unbounded LPs mean "not redundant".
    """
    if partial.n_rows == 0:
        raise ValueError("partial representation is empty")
    c = as_vector(coeffs, "coeffs", partial.H.shape[1])
    rhs = rhs_scale * partial.h
    tol = REDUNDANCY_TOL * (1.0 + abs(bound))
    if orientation == "<=":
        return _redundancy_value(partial.H, rhs, c) <= bound + tol
    if orientation != ">=":
        raise ValueError(f"orientation must be '<=' or '>=', got {orientation!r}")
    res = solve_lp_min_geq(LpProblem(c, partial.H, rhs, "min", ">="))
    if res.status is LpStatus.INFEASIBLE:
        raise MasConstructionError("partially constructed set is empty: constraints are inconsistent")
    if res.status is LpStatus.UNBOUNDED:
        return False
    return res.f >= bound - tol


class _RowStore:
    """Growable row buffer for the construction loops."""

    def __init__(self, width, capacity=64):
        self.H = np.empty((capacity, width))
        self.rhs = np.empty(capacity)
        self.t = np.empty(capacity, dtype=int)
        self.src = np.empty(capacity, dtype=int)
        self.m = 0

    def add(self, g, d, t, src):
        if self.m == len(self.rhs):
            grow = 2 * len(self.rhs)
            self.H = np.resize(self.H, (grow, self.H.shape[1]))
            self.rhs = np.resize(self.rhs, grow)
            self.t = np.resize(self.t, grow)
            self.src = np.resize(self.src, grow)
        self.H[self.m] = g
        self.rhs[self.m] = d
        self.t[self.m] = t
        self.src[self.m] = src
        self.m += 1

    def redundant(self, g, d):
        return _is_redundant_leq(self.H[: self.m], self.rhs[: self.m], g, d)

    def compact(self, keep):
        """Keep only rows flagged in ``keep``; returns old-index -> new-index map (-1 if dropped)."""
        m = self.m
        idx = np.flatnonzero(keep)
        self.H[: len(idx)] = self.H[idx]
        self.rhs[: len(idx)] = self.rhs[idx]
        self.t[: len(idx)] = self.t[idx]
        self.src[: len(idx)] = self.src[idx]
        self.m = len(idx)
        remap = np.full(m, -1)
        remap[idx] = np.arange(len(idx))
        return remap

    def arrays(self):
        m = self.m
        return self.H[:m].copy(), self.rhs[:m].copy(), self.t[:m].copy(), self.src[:m].copy()


def _tightened(s, epsilon):
    # contracts toward the interior for either sign of the bound
    return s - epsilon * np.abs(s)


def _add_steady_rows(store, systems, G_x, G_v, s, epsilon):
    n = G_x.shape[1]
    rhs = _tightened(s, epsilon)
    seen = []
    for sys in systems:
        g_ss = G_x @ sys.steady_state_gain() + G_v
        for i in range(len(s)):
            key = (i, g_ss[i])
            if any(k[0] == i and abs(k[1] - g_ss[i]) <= 1e-14 * (1 + abs(g_ss[i])) for k in seen):
                continue
            seen.append(key)
            if g_ss[i] == 0.0 and rhs[i] < 0.0:
                raise MasConstructionError(f"steady-state constraint row {i} cannot be met by any v")
            g = np.zeros(n + 1)
            g[n] = g_ss[i]
            store.add(g, rhs[i], STEADY_STATE_T, i)
    H, r, _, _ = store.arrays()
    if solve_lp(LpProblem(np.zeros(n + 1), H, r)).status is LpStatus.INFEASIBLE:
        raise MasConstructionError("no constant input satisfies the tightened steady-state constraints")


def _irredundant_mask(H, rhs, t):
    keep = np.ones(len(rhs), dtype=bool)
    for i in range(len(rhs)):
        if t[i] == STEADY_STATE_T:
            continue
        keep[i] = False
        if not _is_redundant_leq(H[keep], rhs[keep], H[i], rhs[i]):
            keep[i] = True
    return keep


def _prune(H, rhs, t, src):
    """Drop non-steady-state rows implied by the remaining rows."""
    keep = _irredundant_mask(H, rhs, t)
    return H[keep], rhs[keep], t[keep], src[keep]


def _output_rows(sys, constraints):
    G_x = constraints.S @ sys.C_st
    G_v = constraints.S @ sys.D_st.ravel()
    return G_x, G_v, constraints.s


def _construct_gilbert_tan(sys, G_x, G_v, s, epsilon, max_index, minimal=True):
    """Row-by-row construction over prediction times t = 0, 1, 2, ...

    Returns (H, rhs, row_t, row_src, j_star).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    sys.require_stable()
    n = sys.n
    q = len(s)
    if q == 0:
        raise ValueError("no constraint rows")
    store = _RowStore(n + 1)
    _add_steady_rows(store, [sys], G_x, G_v, s, epsilon)
    x_ss = sys.steady_state_gain()
    g_ss = G_x @ x_ss + G_v
    Gt = G_x.copy()
    t = 0
    while True:
        if t > max_index:
            raise NonTerminationError(f"admissibility index exceeds cap {max_index}")
        added = False
        coeff_v = g_ss - Gt @ x_ss
        for i in range(q):
            g = np.append(Gt[i], coeff_v[i])
            if not np.any(g):
                continue
            if not store.redundant(g, s[i]):
                store.add(g, s[i], t, i)
                added = True
        if not added:
            j_star = t - 1
            break
        Gt = Gt @ sys.A
        t += 1
    H, rhs, row_t, row_src = store.arrays()
    if minimal:
        H, rhs, row_t, row_src = _prune(H, rhs, row_t, row_src)
    return H, rhs, row_t, row_src, j_star


def _make_rep(H, rhs, row_t, row_src, j_star, epsilon, scale=1.0):
    n = H.shape[1] - 1
    return MasRepresentation(
        H_x=H[:, :n].copy(),
        H_v=H[:, n].copy(),
        h=rhs / scale,
        admissibility_index=int(j_star),
        epsilon=float(epsilon),
        row_t=row_t,
        row_source=row_src,
    )


def build_static_mas(sys: DiscreteLtiSystem, constraints: ConstraintSet, epsilon=DEFAULT_EPSILON,
                     max_index=DEFAULT_MAX_INDEX, minimal=True) -> MasRepresentation:
    """MAS of the static constraints ``S y_st <= s`` with the steady state tightened by epsilon."""
    if sys.p == 0:
        raise ValueError("system has no constrained outputs (C_st is empty)")
    if constraints.S.shape[1] != sys.p:
        raise ValueError(f"S has {constraints.S.shape[1]} columns, system has {sys.p} constrained outputs")
    G_x, G_v, s = _output_rows(sys, constraints)
    return _make_rep(*_construct_gilbert_tan(sys, G_x, G_v, s, epsilon, max_index, minimal), epsilon)


def _tracking_rows(sys, sign):
    return sys.C_tr.copy(), np.zeros(1), np.array([float(sign)])


def build_dynamic_mas_pair(sys: DiscreteLtiSystem, epsilon=DEFAULT_EPSILON,
                           max_index=DEFAULT_MAX_INDEX, minimal=True) -> DynamicMasPair:
    """Build the two dynamic-MAS representations from y_tr <= 1 and y_tr <= -1."""
    sys.require_stable()
    gain = sys.dc_gain_tr()
    if not abs(gain - 1.0) <= 1e-9:
        raise MasConstructionError(f"DC gain from v to y_tr must be 1, got {gain}")
    minus = _construct_gilbert_tan(sys, *_tracking_rows(sys, 1.0), epsilon, max_index, minimal)
    plus = _construct_gilbert_tan(sys, *_tracking_rows(sys, -1.0), epsilon, max_index, minimal)
    return DynamicMasPair(_make_rep(*minus, epsilon, 1.0), _make_rep(*plus, epsilon, -1.0))


def is_below(y_tr, r, tie_tol=TIE_TOL):
    """``y_tr <= r`` where values within a relative ``tie_tol`` of r count as ties."""
    return y_tr <= r + tie_tol * abs(r)


def select_dynamic_mas(pair: DynamicMasPair, r, y_tr, tie_tol=TIE_TOL) -> DynamicSelection:
    """Pick the representation, orientation and RHS scale for (r, y_tr).

    Ties go to the ``<=`` branch. The tie band is relative to |r| so that
    scaling (r, y_tr) together never changes the selected case.
    """
    below = is_below(y_tr, r, tie_tol)
    if r > 0:
        if below:
            return DynamicSelection(pair.rep_minus, "<=", r, "1")
        return DynamicSelection(pair.rep_plus, ">=", r, "2")
    if r < 0:
        if below:
            return DynamicSelection(pair.rep_plus, "<=", r, "3")
        return DynamicSelection(pair.rep_minus, ">=", r, "4")
    rep = pair.rep_minus if pair.rep_minus.n_rows >= pair.rep_plus.n_rows else pair.rep_plus
    return DynamicSelection(rep, "<=" if below else ">=", 0.0, "zero")


def contains(rep: MasRepresentation, orientation, rhs_scale, x, v, tol=MEMBERSHIP_TOL):
    """Membership of (x, v) in ``H_x x + H_v v (<= | >=) rhs_scale * h``.

    ``x`` may be a single state (n,) or a batch (k, n) with ``v`` of shape (k,);
    the result is then a boolean array.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    vals = x @ rep.H_x.T + np.multiply.outer(v, rep.H_v)
    bound = rhs_scale * rep.h
    slack = tol * (1.0 + np.abs(bound))
    if orientation == "<=":
        ok = vals <= bound + slack
    elif orientation == ">=":
        ok = vals >= bound - slack
    else:
        raise ValueError(f"orientation must be '<=' or '>=', got {orientation!r}")
    return np.all(ok, axis=-1) if ok.ndim > 1 else bool(np.all(ok))


def _construct_polytopic(vertices, G_x, G_v, s, epsilon, max_depth, minimal=True):
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    for sys in vertices:
        sys.require_stable()
    n = vertices[0].n
    store = _RowStore(n + 1)
    _add_steady_rows(store, vertices, G_x, G_v, s, epsilon)
    # augmented dynamics (x, v) -> (A x + B v, v) act on rows from the right
    phis = []
    for sys in vertices:
        phi = np.eye(n + 1)
        phi[:n, :n] = sys.A
        phi[:n, n] = sys.B.ravel()
        phis.append(phi)
    frontier = []
    for i in range(len(s)):
        g = np.append(G_x[i], G_v[i])
        if np.any(g) and not store.redundant(g, s[i]):
            store.add(g, s[i], 0, i)
            frontier.append(store.m - 1)
    depth = 0
    compacted = store.m
    while frontier:
        depth += 1
        if depth > max_depth:
            raise NonTerminationError(f"robust construction exceeds depth cap {max_depth}")
        nxt = []
        for k in frontier:
            g, d, i = store.H[k].copy(), store.rhs[k], store.src[k]
            for phi in phis:
                cand = g @ phi
                if not store.redundant(cand, d):
                    store.add(cand, d, depth, i)
                    nxt.append(store.m - 1)
        # rows implied by the others stay implied after back-propagation, so
        # dropping them (and their frontier entries) keeps the LPs small
        if nxt:
            H, rhs, _, _ = store.arrays()
            keep = np.ones(store.m, dtype=bool)
            for k in nxt:
                keep[k] = False
                keep[k] = not _is_redundant_leq(H[keep], rhs[keep], H[k], rhs[k])
            remap = store.compact(keep)
            nxt = [int(remap[k]) for k in nxt if remap[k] >= 0]
        frontier = nxt
        if store.m > 2 * compacted:
            H, rhs, row_t, _ = store.arrays()
            remap = store.compact(_irredundant_mask(H, rhs, row_t))
            frontier = [int(remap[k]) for k in frontier if remap[k] >= 0]
            compacted = store.m
    j_star = depth - 1
    H, rhs, row_t, row_src = store.arrays()
    if minimal:
        H, rhs, row_t, row_src = _prune(H, rhs, row_t, row_src)
    return H, rhs, row_t, row_src, j_star


def build_robust_mas_polytopic(usys: UncertainSystem, constraints: ConstraintSet | None = None,
                               epsilon=DEFAULT_EPSILON, tracking_sign=None,
                               max_depth=DEFAULT_MAX_DEPTH, minimal=True) -> MasRepresentation:
    """MAS that is invariant under every vertex of a polytopic model family.

    Rows are propagated backwards through each vertex's augmented dynamics;
    only rows that are not implied by the current set are propagated further,
    and construction stops at the first depth that adds nothing. Static
    constraints on y_st and/or a tracking constraint ``y_tr <= tracking_sign``
    (``+1`` for the minus representation, ``-1`` for the plus one) may be
    combined. With a tracking constraint the returned ``h`` is normalized by
    ``tracking_sign``; mixing both kinds keeps the raw bounds (scale 1).
    """
    blocks = []
    if constraints is not None:
        blocks.append(_output_rows(usys.nominal, constraints))
    if tracking_sign is not None:
        if tracking_sign not in (1, -1):
            raise ValueError("tracking_sign must be +1 or -1")
        blocks.append(_tracking_rows(usys.nominal, tracking_sign))
    if not blocks:
        raise ValueError("no constraints given")
    G_x = np.vstack([b[0] for b in blocks])
    G_v = np.concatenate([b[1] for b in blocks])
    s = np.concatenate([b[2] for b in blocks])
    parts = _construct_polytopic(list(usys.vertex_systems), G_x, G_v, s, epsilon, max_depth, minimal)
    scale = float(tracking_sign) if tracking_sign is not None and constraints is None else 1.0
    return _make_rep(*parts, epsilon, scale)


def build_robust_dynamic_pair(usys: UncertainSystem, epsilon=DEFAULT_EPSILON,
                              max_depth=DEFAULT_MAX_DEPTH) -> DynamicMasPair:
    return DynamicMasPair(
        build_robust_mas_polytopic(usys, None, epsilon, tracking_sign=1, max_depth=max_depth),
        build_robust_mas_polytopic(usys, None, epsilon, tracking_sign=-1, max_depth=max_depth),
    )


def shrink_for_disturbance(rep: MasRepresentation, row_margins) -> MasRepresentation:
    """Tighten each row bound by a nonnegative margin (support of the disturbance).

    Margins are in the units of ``h``. Raises when a row or the whole set
    becomes infeasible.
    """
    margins = as_vector(row_margins, "row_margins", rep.n_rows)
    if np.any(margins < 0):
        raise ValueError("row margins must be nonnegative")
    h = rep.h - margins
    zero = ~np.any(rep.H != 0.0, axis=1)
    flagged = np.flatnonzero(zero & (h < 0))
    if flagged.size:
        raise MasConstructionError(f"shrinking empties rows {flagged.tolist()}")
    if solve_lp(LpProblem(np.zeros(rep.H.shape[1]), rep.H, h)).status is LpStatus.INFEASIBLE:
        raise MasConstructionError("shrunk set is empty")
    return replace(rep, h=h)


def rows_equal_as_sets(a: MasRepresentation, b: MasRepresentation, tol=1e-9):
    """Whether two representations hold the same rows, ignoring order."""
    if a.n_rows != b.n_rows:
        return False
    ra = np.column_stack([a.H, a.h])
    rb = np.column_stack([b.H, b.h])
    ra = ra[np.lexsort(ra.T[::-1])]
    rb = rb[np.lexsort(rb.T[::-1])]
    return bool(np.allclose(ra, rb, rtol=tol, atol=tol))


def mas_to_csv(rep: MasRepresentation) -> str:
    """CSV text with header ``t,source_row,coeff_x_1..coeff_x_n,coeff_v,h``."""
    n = rep.H_x.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "source_row"] + [f"coeff_x_{k + 1}" for k in range(n)] + ["coeff_v", "h"])
    for i in range(rep.n_rows):
        w.writerow([int(rep.row_t[i]), int(rep.row_source[i])]
                   + [f"{val:.17g}" for val in rep.H_x[i]]
                   + [f"{rep.H_v[i]:.17g}", f"{rep.h[i]:.17g}"])
    return buf.getvalue()


def mas_from_csv(text: str, admissibility_index=None, epsilon=float("nan")) -> MasRepresentation:
    rows = list(csv.reader(io.StringIO(text)))
    header, body = rows[0], [r for r in rows[1:] if r]
    n = sum(1 for col in header if col.startswith("coeff_x_"))
    data = np.array([[float(x) for x in r] for r in body]).reshape(-1, n + 4)
    row_t = data[:, 0].astype(int)
    if admissibility_index is None:
        admissibility_index = int(row_t.max()) if len(row_t) else -1
    return MasRepresentation(
        H_x=data[:, 2:2 + n], H_v=data[:, 2 + n], h=data[:, 3 + n],
        admissibility_index=admissibility_index, epsilon=epsilon,
        row_t=row_t, row_source=data[:, 1].astype(int),
    )
