"""Compiled closed-loop kernel; mirrors governor.govern_step row for row."""

import numpy as np
from numba import njit

# mas_case codes used by the kernel
CASE_NAMES = ("ungoverned", "1", "2", "3", "4", "zero", "none")


@njit(cache=True)
def _kappa_min(Hx, Hv, h, le, scale, x, v_prev, r, tol):
    """Return (min kappa over rows, feasible)."""
    kmin = 1.0
    feasible = True
    n = x.shape[0]
    for j in range(h.shape[0]):
        g = Hv[j] * v_prev
        for i in range(n):
            g += Hx[j, i] * x[i]
        d = Hv[j] * (r - v_prev)
        bound = scale * h[j]
        if le:
            nn = bound - g
        else:
            nn = g - bound
            d = -d
        if nn < -tol * (1.0 + abs(bound)):
            feasible = False
        if nn > 0.0:
            if d > 0.0:
                k = nn / d
                if k > 1.0:
                    k = 1.0
            else:
                k = 1.0
        else:
            k = 0.0
        if k < kmin:
            kmin = k
    return kmin, feasible


@njit(cache=True)
def run_governed(A, b, c_tr, r_all, x0, v_prev,
                 use_pair, Hx_m, Hv_m, h_m, Hx_p, Hv_p, h_p,
                 use_static, Hx_s, Hv_s, h_s, tie_tol, tol):
    steps = r_all.shape[0]
    n = x0.shape[0]
    xs = np.empty((steps + 1, n))
    v_out = np.empty(steps)
    k_tr = np.ones(steps)
    k_st = np.ones(steps)
    k_star = np.ones(steps)
    case = np.empty(steps, dtype=np.int64)
    feas = np.ones(steps, dtype=np.bool_)
    minus_bigger = h_m.shape[0] >= h_p.shape[0]
    x = x0.copy()
    xs[0] = x
    xn = np.empty(n)
    for k in range(steps):
        r = r_all[k]
        y = 0.0
        for i in range(n):
            y += c_tr[i] * x[i]
        ok_tr = True
        if use_pair:
            below = y <= r + tie_tol * abs(r)
            if r > 0.0:
                if below:
                    kt, ok_tr = _kappa_min(Hx_m, Hv_m, h_m, True, r, x, v_prev, r, tol)
                    case[k] = 1
                else:
                    kt, ok_tr = _kappa_min(Hx_p, Hv_p, h_p, False, r, x, v_prev, r, tol)
                    case[k] = 2
            elif r < 0.0:
                if below:
                    kt, ok_tr = _kappa_min(Hx_p, Hv_p, h_p, True, r, x, v_prev, r, tol)
                    case[k] = 3
                else:
                    kt, ok_tr = _kappa_min(Hx_m, Hv_m, h_m, False, r, x, v_prev, r, tol)
                    case[k] = 4
            else:
                if minus_bigger:
                    kt, ok_tr = _kappa_min(Hx_m, Hv_m, h_m, below, 0.0, x, v_prev, r, tol)
                else:
                    kt, ok_tr = _kappa_min(Hx_p, Hv_p, h_p, below, 0.0, x, v_prev, r, tol)
                case[k] = 5
        else:
            kt = 1.0
            case[k] = 6
        ks = 1.0
        ok_st = True
        if use_static:
            ks, ok_st = _kappa_min(Hx_s, Hv_s, h_s, True, 1.0, x, v_prev, r, tol)
        kk = kt if kt < ks else ks
        if kk == 1.0:
            v = r
        else:
            v = v_prev + kk * (r - v_prev)
        k_tr[k] = kt
        k_st[k] = ks
        k_star[k] = kk
        feas[k] = ok_tr and ok_st
        v_out[k] = v
        v_prev = v
        for i in range(n):
            acc = b[i] * v
            for j in range(n):
                acc += A[i, j] * x[j]
            xn[i] = acc
        for i in range(n):
            x[i] = xn[i]
        xs[k + 1] = x
    return xs, v_out, k_tr, k_st, k_star, case, feas
