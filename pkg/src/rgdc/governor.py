"""Scalar reference governor with the dynamic overshoot constraint (RG-DC).

Each step picks kappa in [0, 1] and applies ``v = v_prev + kappa (r - v_prev)``.
kappa is the largest value keeping (x, v) inside the selected MAS; with a
single decision variable the LP collapses to a minimum over rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .mas import MEMBERSHIP_TOL, DynamicMasPair, MasRepresentation, select_dynamic_mas


def kappa_row(n, d):
    """Largest kappa in [0, 1] allowed by one row ``kappa * d <= n``.

    n <= 0 is treated as infeasible and yields 0.
    """
    if n > 0:
        if d > 0:
            return min(n / d, 1.0)
        return 1.0
    return 0.0


def kappa_rows(n, d):
    """Vectorized :func:`kappa_row`."""
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(d > 0, np.minimum(n / d, 1.0), 1.0)
    return np.where(n > 0, k, 0.0)


def _row_terms(rep: MasRepresentation, orientation, scale, x, v_prev, r):
    # summed column by column in the same order as the compiled kernel, so both
    # engines land on the same side of n = 0 for rows that are exactly active
    g = rep.H_v * v_prev
    for i in range(x.shape[0]):
        g = g + rep.H_x[:, i] * x[i]
    d = rep.H_v * (r - v_prev)
    if orientation == "<=":
        return scale * rep.h - g, d
    return g - scale * rep.h, -d


def _feasible(n, scale_h):
    return bool(np.all(n >= -MEMBERSHIP_TOL * (1.0 + np.abs(scale_h))))


class KappaResult(NamedTuple):
    kappa: float
    case: str
    feasible: bool


@dataclass
class GovernorState:
    v_prev: float
    pair: DynamicMasPair | None
    static_mas: MasRepresentation | None = None
    epsilon: float = 1e-3

    def __post_init__(self):
        self.v_prev = float(self.v_prev)
        if self.pair is not None and self.static_mas is not None:
            if self.pair.rep_minus.H_x.shape[1] != self.static_mas.H_x.shape[1]:
                raise ValueError("dynamic and static MAS disagree on the state dimension")


@dataclass(frozen=True)
class GovernorDecision:
    v: float
    kappa_tr: float
    kappa_st: float
    kappa_star: float
    mas_case: str
    feasible: bool


def rg_dc_kappa(state: GovernorState, x, r, y_tr) -> KappaResult:
    """kappa for the dynamic overshoot constraint; 1 when no pair is configured."""
    if state.pair is None:
        return KappaResult(1.0, "none", True)
    sel = select_dynamic_mas(state.pair, r, y_tr)
    n, d = _row_terms(sel.rep, sel.orientation, sel.rhs_scale, x, state.v_prev, r)
    feasible = _feasible(n, sel.rhs_scale * sel.rep.h)
    return KappaResult(float(np.min(kappa_rows(n, d))), sel.case, feasible)


def rg_static_kappa(state: GovernorState, x, r) -> KappaResult:
    if state.static_mas is None:
        return KappaResult(1.0, "static", True)
    rep = state.static_mas
    n, d = _row_terms(rep, "<=", 1.0, x, state.v_prev, r)
    return KappaResult(float(np.min(kappa_rows(n, d))), "static", _feasible(n, rep.h))


def apply_kappa(v_prev, r, kappa):
    """``v_prev + kappa (r - v_prev)``, exact at both ends of [0, 1]."""
    if kappa == 1.0:
        return float(r)
    return v_prev + kappa * (r - v_prev)


def govern_step(state: GovernorState, x, r, y_tr) -> GovernorDecision:
    """One governor update; mutates ``state.v_prev``."""
    x = np.asarray(x, dtype=float)
    tr = rg_dc_kappa(state, x, r, y_tr)
    st = rg_static_kappa(state, x, r)
    k = min(tr.kappa, st.kappa)
    v = apply_kappa(state.v_prev, r, k)
    state.v_prev = v
    return GovernorDecision(v, tr.kappa, st.kappa, k, tr.case, tr.feasible and st.feasible)
