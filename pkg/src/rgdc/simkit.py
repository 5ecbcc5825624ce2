"""Closed-loop simulation of the governed plant and the PLL experiments."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .governor import GovernorState, govern_step
from .mas import MEMBERSHIP_TOL, TIE_TOL, DiscreteLtiSystem
from .numerics import zoh_discretize


class ConfigurationError(ValueError):
    """Experiment parameters that cannot produce a meaningful run."""


class OvershootWarning(UserWarning):
    """overshoot_metric fell back to the absolute overshoot (r_final = 0)."""


def pll_continuous(G_lp=100.0, G_vco=200.0):
    """Closed-loop PLL  G_lp G_vco / (s^2 + G_lp s + G_lp G_vco)  with x = (y, dy/dt)."""
    k = G_lp * G_vco
    A = np.array([[0.0, 1.0], [-k, -G_lp]])
    B = np.array([[0.0], [k]])
    return A, B


def pll_damping(G_lp=100.0, G_vco=200.0):
    """(zeta, omega_n) of the closed-loop PLL."""
    wn = math.sqrt(G_lp * G_vco)
    return G_lp / (2.0 * wn), wn


def pll_system(G_lp=100.0, G_vco=200.0, Ts=1e-4):
    """ZOH-discretized PLL; y_tr = phase (x1), y_st = its rate (x2)."""
    A, B = zoh_discretize(*pll_continuous(G_lp, G_vco), Ts)
    return DiscreteLtiSystem(A, B, [[1.0, 0.0]], [[0.0, 1.0]], [[0.0]], Ts)


@dataclass(frozen=True)
class ReferenceSignal:
    """r(t): a constant, a piecewise-constant step sequence or a sinusoid.

    Step sequences hold ``initial`` before the first step time.
    """

    kind: str = "constant"
    level: float = 0.0
    steps: tuple = ()
    amplitude: float = 1.0
    frequency: float = 1.0
    initial: float = 0.0

    def __post_init__(self):
        if self.kind not in ("constant", "step_sequence", "sinusoid"):
            raise ValueError(f"unknown reference kind {self.kind!r}")
        steps = tuple((float(t), float(lv)) for t, lv in self.steps)
        times = [t for t, _ in steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("step times must be strictly increasing")
        if self.kind == "step_sequence" and not steps:
            raise ValueError("step_sequence needs at least one step")
        if self.kind == "sinusoid" and not self.frequency > 0:
            raise ValueError("sinusoid frequency must be positive")
        object.__setattr__(self, "steps", steps)

    @classmethod
    def constant(cls, level):
        return cls("constant", level=float(level))

    @classmethod
    def step_sequence(cls, steps, initial=0.0):
        return cls("step_sequence", steps=tuple(steps), initial=float(initial))

    @classmethod
    def sinusoid(cls, amplitude, frequency):
        return cls("sinusoid", amplitude=float(amplitude), frequency=float(frequency))

    def scaled(self, alpha):
        return ReferenceSignal(self.kind, alpha * self.level, tuple((t, alpha * lv) for t, lv in self.steps),
                               alpha * self.amplitude, self.frequency, alpha * self.initial)

    def sample(self, times):
        times = np.asarray(times, dtype=float)
        if self.kind == "constant":
            return np.full(times.shape, self.level)
        if self.kind == "sinusoid":
            return self.amplitude * np.sin(self.frequency * times)
        step_t = np.array([t for t, _ in self.steps])
        levels = np.array([self.initial] + [lv for _, lv in self.steps])
        # tiny slack so a step scheduled at k*Ts is not lost to rounding of k*Ts
        idx = np.searchsorted(step_t, times + 1e-12, side="right")
        return levels[idx]

    @property
    def final(self):
        if self.kind == "step_sequence":
            return self.steps[-1][1]
        return self.level


@dataclass
class SimulationTrace:
    t: np.ndarray
    r: np.ndarray
    v: np.ndarray
    y_tr: np.ndarray
    y_st: np.ndarray
    kappa_tr: np.ndarray
    kappa_st: np.ndarray
    kappa_star: np.ndarray
    mas_case: np.ndarray
    feasible: np.ndarray
    x: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.t)

    def to_csv(self):
        """Trace CSV: ``t,r,v,y_tr,y_st_1..p,kappa_tr,kappa_st,kappa_star,mas_case,feasible``."""
        p = self.y_st.shape[1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "r", "v", "y_tr"] + [f"y_st_{i + 1}" for i in range(p)]
                   + ["kappa_tr", "kappa_st", "kappa_star", "mas_case", "feasible"])
        fmt = "{:.17g}".format
        for k in range(len(self.t)):
            w.writerow([fmt(self.t[k]), fmt(self.r[k]), fmt(self.v[k]), fmt(self.y_tr[k])]
                       + [fmt(val) for val in self.y_st[k]]
                       + [fmt(self.kappa_tr[k]), fmt(self.kappa_st[k]), fmt(self.kappa_star[k]),
                          self.mas_case[k], int(self.feasible[k])])
        return buf.getvalue()


def _compiled_available():
    try:
        from . import _fastsim  # noqa: F401
    except ImportError:
        return False
    return True


def simulate(sys: DiscreteLtiSystem, state: GovernorState, ref: ReferenceSignal, x0, steps,
             governed=True, engine="auto") -> SimulationTrace:
    """Run ``steps`` samples of governor + plant; ``governed=False`` forces kappa = 1.

    ``engine`` selects the per-step loop: ``"python"`` drives
    :func:`govern_step`, ``"compiled"`` runs the numba kernel doing the same
    arithmetic, ``"auto"`` prefers the kernel when numba imports.
    ``state.v_prev`` is left at the last applied reference.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if engine == "auto":
        engine = "compiled" if _compiled_available() else "python"
    times = np.arange(steps) * sys.Ts
    r_all = ref.sample(times)
    x = np.array(x0, dtype=float).reshape(sys.n)
    if engine == "compiled":
        xs, v, k_tr, k_st, k_star, case, feas = _run_compiled(sys, state, r_all, x, governed)
    elif engine == "python":
        xs, v, k_tr, k_st, k_star, case, feas = _run_python(sys, state, r_all, x, governed)
    else:
        raise ValueError(f"unknown engine {engine!r}")
    X = xs[:-1]
    y_st = X @ sys.C_st.T + np.outer(v, sys.D_st.ravel())
    return SimulationTrace(times, r_all, v, X @ sys.C_tr.ravel(), y_st,
                           k_tr, k_st, k_star, case, feas, xs)


def _run_python(sys, state, r_all, x, governed):
    steps = len(r_all)
    A, b = sys.A, sys.B.ravel()
    c_tr = sys.C_tr.ravel()
    xs = np.empty((steps + 1, sys.n))
    v = np.empty(steps)
    k_tr = np.ones(steps)
    k_st = np.ones(steps)
    k_star = np.ones(steps)
    case = np.empty(steps, dtype=object)
    feas = np.ones(steps, dtype=bool)
    xs[0] = x
    for k in range(steps):
        r = r_all[k]
        if governed:
            dec = govern_step(state, x, r, float(c_tr @ x))
            v[k] = dec.v
            k_tr[k], k_st[k], k_star[k] = dec.kappa_tr, dec.kappa_st, dec.kappa_star
            case[k] = dec.mas_case
            feas[k] = dec.feasible
        else:
            v[k] = r
            state.v_prev = r
            case[k] = "ungoverned"
        # same summation order as the compiled kernel
        xn = b * v[k]
        for j in range(x.shape[0]):
            xn = xn + A[:, j] * x[j]
        x = xn
        xs[k + 1] = x
    return xs, v, k_tr, k_st, k_star, case, feas


def _run_compiled(sys, state, r_all, x, governed):
    from ._fastsim import CASE_NAMES, run_governed

    empty2 = np.zeros((0, sys.n))
    empty1 = np.zeros(0)
    pair = state.pair if governed else None
    static = state.static_mas if governed else None
    m = pair.rep_minus if pair is not None else None
    p = pair.rep_plus if pair is not None else None
    out = run_governed(
        sys.A, sys.B.ravel().copy(), sys.C_tr.ravel().copy(), np.ascontiguousarray(r_all), x,
        float(state.v_prev),
        pair is not None,
        m.H_x if m else empty2, m.H_v if m else empty1, m.h if m else empty1,
        p.H_x if p else empty2, p.H_v if p else empty1, p.h if p else empty1,
        static is not None,
        static.H_x if static else empty2, static.H_v if static else empty1, static.h if static else empty1,
        TIE_TOL, MEMBERSHIP_TOL,
    )
    xs, v, k_tr, k_st, k_star, codes, feas = out
    names = np.array(CASE_NAMES, dtype=object)
    case = names[codes] if governed else np.full(len(v), "ungoverned", dtype=object)
    state.v_prev = float(v[-1])
    return xs, v, k_tr, k_st, k_star, case, feas


def steady_state(sys: DiscreteLtiSystem, v):
    """Equilibrium state for a constant applied reference v."""
    return sys.steady_state_gain() * float(v)


def overshoot_metric(trace: SimulationTrace, r_final):
    """Relative overshoot of y_tr past r_final: 0 for a response that never crosses.

    Negative steps are mirrored. For r_final = 0 the absolute overshoot is
    returned (in the direction away from the initial output) and an
    :class:`OvershootWarning` is issued.
    """
    y = np.asarray(trace.y_tr, dtype=float)
    if y.size == 0:
        raise ValueError("trace is empty")
    if r_final == 0:
        warnings.warn("r_final = 0: returning absolute overshoot", OvershootWarning, stacklevel=2)
        return float(max(0.0, y.max()) if y[0] <= 0 else max(0.0, -y.min()))
    if r_final > 0:
        return float(max(0.0, y.max() - r_final) / r_final)
    return float(max(0.0, r_final - y.min()) / -r_final)


def segment_crossings(trace: SimulationTrace):
    """Per constant-r segment, how far y_tr gets past r on the far side.

    The side is set by y_tr at the segment's first sample (ties count as
    below). Returns a list of (start index, r, crossing >= 0).
    """
    r = np.asarray(trace.r)
    y = np.asarray(trace.y_tr)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(r) != 0) + 1])
    ends = np.append(starts[1:], len(r))
    out = []
    for a, b in zip(starts, ends):
        level = r[a]
        if y[a] <= level:
            cross = max(0.0, float(np.max(y[a:b]) - level))
        else:
            cross = max(0.0, float(level - np.min(y[a:b])))
        out.append((int(a), float(level), cross))
    return out


def multi_step_experiment(sys: DiscreteLtiSystem, state: GovernorState, steps, horizon=0.75,
                          initial=0.0, x0=None, engine="auto") -> SimulationTrace:
    """Governed response to a piecewise-constant reference.

    ``steps`` is a list of (time in s, level). The plant starts at the
    equilibrium of ``state.v_prev`` unless ``x0`` is given.
    """
    ref = ReferenceSignal.step_sequence(steps, initial=initial)
    n = int(round(horizon / sys.Ts))
    if n < 1:
        raise ConfigurationError("horizon shorter than one sample")
    if x0 is None:
        x0 = steady_state(sys, state.v_prev)
    return simulate(sys, state, ref, x0, n, engine=engine)


DEFAULT_CONVERGENCE_RANGES = ((-2.0, 2.0), (-200.0, 200.0), (-1.0, 1.0))


def convergence_experiment(sys: DiscreteLtiSystem, state: GovernorState, n_runs=50,
                           ranges=DEFAULT_CONVERGENCE_RANGES, omega=100.0, amplitude=1.0,
                           seed=0, horizon=0.5, engine="auto"):
    """Governed runs under r = amplitude sin(omega t) from random initial conditions.

    ``ranges`` lists (low, high) per state component followed by the range of
    v(-1); samples are jointly uniform from a generator seeded with ``seed``.
    ``state`` supplies the MAS data; its ``v_prev`` is replaced per run.
    """
    ranges = np.asarray(ranges, dtype=float)
    if ranges.shape != (sys.n + 1, 2) or np.any(ranges[:, 1] < ranges[:, 0]):
        raise ConfigurationError(f"ranges must be {sys.n + 1} (low, high) pairs")
    steps = int(round(horizon / sys.Ts))
    if steps < 1:
        raise ConfigurationError("horizon shorter than one sample")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(ranges[:, 0], ranges[:, 1], size=(n_runs, sys.n + 1))
    ref = ReferenceSignal.sinusoid(amplitude, omega)
    traces = []
    for row in draws:
        run_state = GovernorState(row[-1], state.pair, state.static_mas, state.epsilon)
        traces.append(simulate(sys, run_state, ref, row[:-1], steps, engine=engine))
    return traces


def final_window_spread(traces, fraction=0.2):
    """Largest pairwise sample-wise |y_tr| distance over the last ``fraction`` of the runs."""
    Y = np.array([tr.y_tr for tr in traces])
    start = int(np.floor((1.0 - fraction) * Y.shape[1]))
    window = Y[:, start:]
    return float(np.max(window.max(axis=0) - window.min(axis=0)))


@dataclass(frozen=True)
class BodePoint:
    omega: float
    input_amplitude: float
    sup_output: float
    magnitude_db: float


def default_omegas(n=100, lo=10.0, hi=1000.0):
    return np.geomspace(lo, hi, n)


def settling_time(sys: DiscreteLtiSystem):
    """4 / (zeta omega_n) of the slowest mode, from the discrete eigenvalues."""
    rho = np.abs(np.linalg.eigvals(sys.A)).max()
    if not 0.0 < rho < 1.0:
        raise ConfigurationError("settling time needs a stable, non-deadbeat A")
    return 4.0 * sys.Ts / -math.log(rho)


def bode_horizon(sys: DiscreteLtiSystem, omega, periods=50):
    """max(periods periods, twice the settling time), in seconds."""
    return max(periods * 2.0 * math.pi / omega, 2.0 * settling_time(sys))


def sup_over_periods(y, Ts, omega, discard=0.6):
    """sup |y| over the largest whole number of periods after the discard window."""
    n = len(y)
    period = 2.0 * math.pi / omega
    avail = (n - int(math.ceil(discard * n))) * Ts
    whole = int(math.floor(avail / period + 1e-9))
    if whole < 1:
        raise ConfigurationError(
            f"measurement window {avail:.6g} s is shorter than one period {period:.6g} s")
    m = max(1, int(round(whole * period / Ts)))
    return float(np.max(np.abs(y[n - m:])))


def nonlinear_bode(sys: DiscreteLtiSystem, state: GovernorState, omegas=None, amplitude=1.0,
                   horizon=None, discard=0.6, governed=True, engine="auto"):
    """Steady-state sup-norm gain of the governed loop under sinusoidal references.

    Each frequency starts from rest (x = 0, v(-1) = 0) with
    r(t) = amplitude sin(omega t). The horizon defaults to
    :func:`bode_horizon`; an explicit horizon must leave at least one period
    after the first ``discard`` fraction.
    """
    if amplitude <= 0:
        raise ConfigurationError("amplitude must be positive")
    omegas = default_omegas() if omegas is None else np.atleast_1d(np.asarray(omegas, dtype=float))
    points = []
    for w in omegas:
        if not w > 0:
            raise ConfigurationError("frequencies must be positive")
        T = bode_horizon(sys, w) if horizon is None else float(horizon)
        if T < 2.0 * math.pi / w:
            raise ConfigurationError(f"horizon {T:.6g} s is shorter than one period at {w:.6g} rad/s")
        steps = int(math.ceil(T / sys.Ts))
        run_state = GovernorState(0.0, state.pair, state.static_mas, state.epsilon)
        tr = simulate(sys, run_state, ReferenceSignal.sinusoid(amplitude, w), np.zeros(sys.n), steps,
                      governed=governed, engine=engine)
        sup = sup_over_periods(tr.y_tr, sys.Ts, w, discard)
        points.append(BodePoint(float(w), float(amplitude), sup, 20.0 * math.log10(sup / amplitude)))
    return points


def linear_gain(sys: DiscreteLtiSystem, omega):
    """|C_tr (z I - A)^-1 B| at z = exp(j omega Ts)."""
    z = np.exp(1j * np.asarray(omega, dtype=float) * sys.Ts)
    out = []
    for zk in np.atleast_1d(z):
        out.append(abs((sys.C_tr @ np.linalg.solve(zk * np.eye(sys.n) - sys.A, sys.B))[0, 0]))
    return np.array(out) if np.ndim(omega) else out[0]


def linear_bode(sys: DiscreteLtiSystem, omegas=None, amplitude=1.0):
    omegas = default_omegas() if omegas is None else np.atleast_1d(np.asarray(omegas, dtype=float))
    g = linear_gain(sys, omegas)
    return [BodePoint(float(w), float(amplitude), float(amplitude * gk), float(20.0 * np.log10(gk)))
            for w, gk in zip(omegas, g)]


def linear_peak(sys: DiscreteLtiSystem, lo=1.0, hi=None, n=4001):
    """(omega, dB) of the largest linear gain on [lo, hi], refined around the grid maximum."""
    hi = 0.9 * math.pi / sys.Ts if hi is None else hi
    grid = np.geomspace(lo, hi, n)
    k = int(np.argmax(linear_gain(sys, grid)))
    fine = np.linspace(grid[max(k - 1, 0)], grid[min(k + 1, n - 1)], 2001)
    g = linear_gain(sys, fine)
    j = int(np.argmax(g))
    return float(fine[j]), float(20.0 * np.log10(g[j]))


def bode_to_csv(points):
    """Bode CSV: ``omega_rad_s,amplitude,sup_output,magnitude_db``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["omega_rad_s", "amplitude", "sup_output", "magnitude_db"])
    for p in points:
        w.writerow([f"{p.omega:.17g}", f"{p.input_amplitude:.17g}", f"{p.sup_output:.17g}",
                    f"{p.magnitude_db:.17g}"])
    return buf.getvalue()


def vertex_runs(vertices, state: GovernorState, ref: ReferenceSignal, steps, x0=None, engine="auto"):
    """Simulate each vertex plant under one governor configuration."""
    traces = []
    for sys in vertices:
        run_state = GovernorState(state.v_prev, state.pair, state.static_mas, state.epsilon)
        start = steady_state(sys, state.v_prev) if x0 is None else x0
        traces.append(simulate(sys, run_state, ref, start, steps, engine=engine))
    return traces
