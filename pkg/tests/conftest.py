import numpy as np
import pytest

from rgdc.mas import (
    ConstraintSet,
    DiscreteLtiSystem,
    UncertainSystem,
    build_dynamic_mas_pair,
    build_robust_dynamic_pair,
    build_robust_mas_polytopic,
    build_static_mas,
)
from rgdc.simkit import pll_system

EPS = 1e-3
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def pll():
    return pll_system()


@pytest.fixture(scope="session")
def slew():
    return ConstraintSet([[1.0], [-1.0]], [100.0, 100.0])


@pytest.fixture(scope="session")
def pair(pll):
    return build_dynamic_mas_pair(pll, EPS)


@pytest.fixture(scope="session")
def static(pll, slew):
    return build_static_mas(pll, slew, EPS)


@pytest.fixture(scope="session")
def vertices():
    return (pll_system(G_vco=160.0), pll_system(G_vco=240.0))


@pytest.fixture(scope="session")
def robust_pair(vertices):
    return build_robust_dynamic_pair(UncertainSystem(vertices), EPS)


@pytest.fixture(scope="session")
def robust_static(vertices, slew):
    return build_robust_mas_polytopic(UncertainSystem(vertices), slew, EPS)


@pytest.fixture(scope="session")
def scalar():
    """x+ = 0.5 x + 0.5 v, y = x."""
    return DiscreteLtiSystem([[0.5]], [0.5], [[1.0]], [[1.0]], [[0.0]])


def oriented(rep, orientation, scale):
    """(G, g) with the set written as G z <= g."""
    if orientation == "<=":
        return rep.H, scale * rep.h
    return -rep.H, -scale * rep.h


def hit_and_run(G, g, z0, n, rng, box, thin=3):
    """Approximately uniform samples of {G z <= g} intersected with |z - z0| <= box.

    z0 must be strictly inside.
    """
    G = np.vstack([G, np.eye(len(z0)), -np.eye(len(z0))])
    g = np.concatenate([g, z0 + box, box - z0])
    z = np.array(z0, dtype=float)
    out = []
    while len(out) < n:
        for _ in range(thin):
            d = rng.standard_normal(len(z))
            d /= np.linalg.norm(d)
            gd = G @ d
            slack = g - G @ z
            with np.errstate(divide="ignore"):
                ratios = slack / gd
            hi = np.min(ratios[gd > 0])
            lo = np.max(ratios[gd < 0])
            z = z + rng.uniform(lo, hi) * d
        out.append(z.copy())
    return np.array(out)


def interior_point(sys, r, case):
    """A steady state well inside the dynamic MAS of the given selection case."""
    v = 0.5 * r if case in ("1", "4") else 1.5 * r
    return np.append(sys.steady_state_gain() * v, v)


def state_box(r):
    return abs(r) * np.array([3.0, 300.0, 3.0])


# ---------------------------------------------------------------- trajectory oracles


def _grid_rollout(sys, x, v_grid, steps, observe):
    """Worst value of ``observe(X)`` over ``steps`` samples for each constant v in the grid."""
    X = np.tile(np.asarray(x, dtype=float), (len(v_grid), 1))
    worst = np.full(len(v_grid), -np.inf)
    b = sys.B.ravel()
    for _ in range(steps):
        worst = np.maximum(worst, observe(X))
        X = X @ sys.A.T + np.outer(v_grid, b)
    return worst


def brute_kappa_tracking(sys, x, v_prev, r, eps, step=1e-3, steps=5000, tol=1e-9):
    """Largest grid kappa whose held v keeps y_tr on its current side of r forever.

    Independent of any MAS: the plant is rolled out directly and the steady
    state must clear r by eps |r|. Returns 0 when no grid value works.
    """
    kappas = np.arange(0.0, 1.0 + step / 2, step)
    v = v_prev + kappas * (r - v_prev)
    y0 = float((sys.C_tr @ x)[0])
    c = sys.C_tr.ravel()
    if y0 <= r:
        worst = _grid_rollout(sys, x, v, steps, lambda X: X @ c - r)
        ok = (worst <= tol * abs(r)) & (v <= r - eps * abs(r) + tol * abs(r))
    else:
        worst = _grid_rollout(sys, x, v, steps, lambda X: r - X @ c)
        ok = (worst <= tol * abs(r)) & (v >= r + eps * abs(r) - tol * abs(r))
    good = np.flatnonzero(ok)
    return float(kappas[good[-1]]) if good.size and good[0] == 0 else 0.0


def brute_kappa_slew(sys, x, v_prev, r, bound=100.0, step=1e-3, steps=5000, tol=1e-9):
    """Largest grid kappa keeping |y_st| <= bound over the rollout."""
    kappas = np.arange(0.0, 1.0 + step / 2, step)
    v = v_prev + kappas * (r - v_prev)
    c = sys.C_st[0]
    worst = _grid_rollout(sys, x, v, steps, lambda X: np.abs(X @ c))
    good = np.flatnonzero(worst <= bound * (1 + tol))
    return float(kappas[good[-1]]) if good.size and good[0] == 0 else 0.0


def lp_kappa(rep, orientation, scale, x, v_prev, r):
    """LP form of the kappa problem: max kappa in [0, 1] keeping (x, v) in the oriented set; None if infeasible."""
    from rgdc.numerics import LpProblem, LpStatus, solve_lp

    a = rep.H_v * (r - v_prev)
    b = scale * rep.h - rep.H_x @ x - rep.H_v * v_prev
    if orientation == ">=":
        a, b = -a, -b
    M = np.concatenate([a, [1.0, -1.0]])[:, None]
    N = np.concatenate([b, [1.0, 0.0]])
    res = solve_lp(LpProblem([1.0], M, N))
    if res.status is LpStatus.INFEASIBLE:
        return None
    return float(res.z[0])


def random_step_scenario(rng, sys, pair, eps):
    """A state reached by a governed transient, paired with a fresh random reference."""
    from rgdc.governor import GovernorState
    from rgdc.simkit import ReferenceSignal, simulate

    v0 = rng.uniform(-1.0, 1.0)
    r1 = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0)
    k = int(rng.integers(1, 400))
    state = GovernorState(v0, pair, None, eps)
    tr = simulate(sys, state, ReferenceSignal.constant(r1), sys.steady_state_gain() * v0, k)
    x = tr.x[-1]
    r2 = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0)
    return x, state.v_prev, r2
