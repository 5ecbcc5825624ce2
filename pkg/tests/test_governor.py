import numpy as np
import pytest

from conftest import (
    EPS,
    brute_kappa_slew,
    brute_kappa_tracking,
    hit_and_run,
    interior_point,
    lp_kappa,
    oriented,
    random_step_scenario,
    state_box,
)
from rgdc import governor
from rgdc.governor import (
    GovernorState,
    KappaResult,
    govern_step,
    kappa_row,
    kappa_rows,
    rg_dc_kappa,
    rg_static_kappa,
)
from rgdc.mas import contains, select_dynamic_mas
from rgdc.simkit import ReferenceSignal, simulate


def y_of(sys, x):
    return float((sys.C_tr @ x)[0])


@pytest.mark.parametrize("n,d,want", [(0.5, 1, 0.5), (2, 1, 1.0), (1, -3, 1.0), (-0.1, 5, 0.0),
                                      (0, 1, 0.0), (1, 0, 1.0), (0, -1, 0.0)])
def test_kappa_row(n, d, want):
    assert kappa_row(n, d) == want


def test_kappa_rows_vectorized():
    rng = np.random.default_rng(0)
    n, d = rng.normal(size=500), rng.normal(size=500)
    n[:20] = 0.0
    d[20:40] = 0.0
    assert np.array_equal(kappa_rows(n, d), [kappa_row(a, b) for a, b in zip(n, d)])


def test_steady_state_below_tightened_bound(pll, pair):
    # v_prev sits eps below the steady-state bound; only half the remaining step is admissible
    v = 1 - 2 * EPS
    state = GovernorState(v, pair, None, EPS)
    res = rg_dc_kappa(state, pll.steady_state_gain() * v, 1.0, v)
    assert res.case == "1" and res.feasible
    assert res.kappa == pytest.approx(0.5, abs=1e-9)


def test_step_from_rest_matches_brute_force(pll, pair):
    state = GovernorState(0.0, pair, None, EPS)
    res = rg_dc_kappa(state, np.zeros(2), 1.0, 0.0)
    assert 0.0 < res.kappa < 1.0
    assert res.kappa == pytest.approx(brute_kappa_tracking(pll, np.zeros(2), 0.0, 1.0, EPS), abs=1e-3)


def test_fast_state_is_infeasible(pll, pair):
    x = np.array([0.5, 150.0])  # already rushing past r
    state = GovernorState(0.9, pair, None, EPS)
    assert not contains(pair.rep_minus, "<=", 0.55, x, 0.9)
    dec = govern_step(state, x, 0.55, y_of(pll, x))
    assert dec.kappa_tr == 0.0 and not dec.feasible and dec.v == 0.9


def test_no_pair_means_no_tracking_limit():
    assert rg_dc_kappa(GovernorState(0.0, None), np.zeros(2), 5.0, 0.0) == KappaResult(1.0, "none", True)


def test_static_absent_gives_one(pair):
    assert rg_static_kappa(GovernorState(0.0, pair), np.zeros(2), 5.0).kappa == 1.0


def test_static_interior_hold(pll, pair, static):
    state = GovernorState(0.3, pair, static, EPS)
    assert rg_static_kappa(state, pll.steady_state_gain() * 0.3, 0.3).kappa == 1.0


@pytest.mark.parametrize("r", [2.0, 3.0, 5.0, 10.0])
def test_static_aggressive_step_matches_brute_force(pll, pair, static, r):
    state = GovernorState(0.0, pair, static, EPS)
    k = rg_static_kappa(state, np.zeros(2), r).kappa
    assert k < 1.0
    assert k == pytest.approx(brute_kappa_slew(pll, np.zeros(2), 0.0, r), abs=1e-3)


def test_govern_step_at_reference_steady_state(pll, pair):
    # r = v_prev = y_tr violates the tightened steady-state row, so kappa is 0 but v already equals r
    state = GovernorState(1.0, pair, None, EPS)
    dec = govern_step(state, pll.steady_state_gain(), 1.0, 1.0)
    assert dec.v == 1.0 and state.v_prev == 1.0
    assert dec.kappa_star == 0.0 and not dec.feasible


def test_govern_step_takes_minimum(monkeypatch):
    monkeypatch.setattr(governor, "rg_dc_kappa", lambda *a: KappaResult(0.3, "1", True))
    monkeypatch.setattr(governor, "rg_static_kappa", lambda *a: KappaResult(0.7, "static", True))
    state = GovernorState(0.0, None)
    dec = govern_step(state, np.zeros(2), 2.0, 0.0)
    assert dec.kappa_star == 0.3 and dec.v == pytest.approx(0.6) and state.v_prev == dec.v


def test_monotone_applied_reference(pll, pair, static):
    for r in (1.0, -2.0, 4.0):
        tr = simulate(pll, GovernorState(0.0, pair, static, EPS), ReferenceSignal.constant(r),
                      np.zeros(2), 3000)
        dv = np.diff(tr.v) * np.sign(r)
        assert np.all(dv >= -1e-15) and np.all(np.abs(tr.v) <= abs(r) + 1e-15)
        assert tr.v[-1] == pytest.approx(r * (1 - EPS), rel=1e-3)


@pytest.mark.parametrize("case,r", [("1", 1.0), ("2", 1.0), ("3", -1.0), ("4", -1.0)])
def test_fixed_reference_never_crossed(pll, pair, case, r):
    rng = np.random.default_rng(40)
    y = r * (0.5 if case in ("1", "4") else 1.5)
    sel = select_dynamic_mas(pair, r, y)
    G, g = oriented(sel.rep, sel.orientation, sel.rhs_scale)
    Z = hit_and_run(G, g, interior_point(pll, r, case), 25, rng, state_box(r), thin=20)
    below = case in ("1", "3")
    for z in Z:
        tr = simulate(pll, GovernorState(z[2], pair, None, EPS), ReferenceSignal.constant(r), z[:2], 10000)
        if below:
            assert tr.y_tr.max() <= r + 1e-8
        else:
            assert tr.y_tr.min() >= r - 1e-8


def test_kappa_matches_lp_oracle(pll, pair):
    rng = np.random.default_rng(41)
    checked = infeasible = 0
    while checked < 1000:
        r = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 3.0)
        case = rng.choice(["1", "2"]) if r > 0 else rng.choice(["3", "4"])
        z = interior_point(pll, r, case) + rng.normal(0, [0.3, 40.0, 0.5]) * abs(r) * rng.uniform(0, 1)
        x, v_prev = z[:2], z[2]
        sel = select_dynamic_mas(pair, r, y_of(pll, x))
        res = rg_dc_kappa(GovernorState(v_prev, pair, None, EPS), x, r, y_of(pll, x))
        ref = lp_kappa(sel.rep, sel.orientation, sel.rhs_scale, x, v_prev, r)
        if ref is None:
            assert res.kappa == 0.0 and not res.feasible
            infeasible += 1
        else:
            assert res.feasible
            assert res.kappa == pytest.approx(ref, abs=1e-9)
        checked += 1
    assert 50 < infeasible < 950


def test_kappa_matches_trajectory_brute_force(pll, pair):
    rng = np.random.default_rng(42)
    for _ in range(30):
        x, v_prev, r = random_step_scenario(rng, pll, pair, EPS)
        got = rg_dc_kappa(GovernorState(v_prev, pair, None, EPS), x, r, y_of(pll, x)).kappa
        assert got == pytest.approx(brute_kappa_tracking(pll, x, v_prev, r, EPS), abs=2e-3)


def test_dimension_mismatch_rejected(pair, scalar):
    from rgdc.mas import ConstraintSet, build_static_mas

    with pytest.raises(ValueError):
        GovernorState(0.0, pair, build_static_mas(scalar, ConstraintSet([[1.0]], [1.0]), EPS))
