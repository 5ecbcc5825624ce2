"""Command-line driver: scenario files in, CSV artifacts and a run manifest out.

Scenarios are TOML files (or the name of a built-in scenario). Every run
writes ``<experiment>_<name>*.csv`` plus ``run_manifest_<experiment>_<name>.toml``,
a flat ``key = value`` file holding every resolved parameter; it is itself a
valid scenario, so feeding it back with ``--config`` repeats the run.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys as _sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .governor import GovernorState
from .mas import (
    ConstraintSet,
    DiscreteLtiSystem,
    MasConstructionError,
    UncertainSystem,
    build_dynamic_mas_pair,
    build_robust_dynamic_pair,
    build_robust_mas_polytopic,
    build_static_mas,
    mas_to_csv,
    rows_equal_as_sets,
)
from .numerics import LpSolverError, zoh_discretize
from .simkit import (
    ConfigurationError,
    ReferenceSignal,
    bode_to_csv,
    convergence_experiment,
    default_omegas,
    final_window_spread,
    linear_bode,
    linear_peak,
    multi_step_experiment,
    nonlinear_bode,
    overshoot_metric,
    pll_system,
    segment_crossings,
    simulate,
    steady_state,
    vertex_runs,
)

EXPERIMENTS = ("mas", "simulate", "multistep", "bode", "robust", "converge")


class ConfigError(ValueError):
    """A scenario file that cannot be turned into a run."""


# ---------------------------------------------------------------- loading


def builtin_scenarios():
    root = resources.files("rgdc.scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".toml"))


def read_config(ref):
    """Parse a scenario from a file path or a built-in scenario name."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text()
        origin = str(path)
    elif ref in builtin_scenarios():
        text = (resources.files("rgdc.scenarios") / f"{ref}.toml").read_text()
        origin = f"builtin:{ref}"
    else:
        raise ConfigError(f"no such scenario file or built-in scenario: {ref!r}")
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{origin}: {exc}") from None


_TOP_KEYS = {"name", "experiment", "epsilon", "seed", "output_dir", "system", "constraints",
             "reference", "simulation", "uncertainty", "bode", "convergence", "result"}


def _table(raw, key, allowed, required=False):
    val = raw.get(key)
    if val is None:
        if required:
            raise ConfigError(f"missing table [{key}]")
        return None
    if not isinstance(val, dict):
        raise ConfigError(f"field '{key}' must be a table")
    extra = set(val) - set(allowed)
    if extra:
        raise ConfigError(f"unknown field(s) in [{key}]: {', '.join(sorted(extra))}")
    return val


def _number(tab, key, where, default=None, positive=False):
    val = tab.get(key, default)
    if val is None:
        raise ConfigError(f"missing field '{where}.{key}'")
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"field '{where}.{key}' must be a number")
    val = float(val)
    if not math.isfinite(val) or (positive and val <= 0):
        raise ConfigError(f"field '{where}.{key}' must be a finite{' positive' if positive else ''} number")
    return val


def _integer(tab, key, where, default=None, minimum=None):
    val = tab.get(key, default)
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"field '{where}.{key}' must be an integer")
    if minimum is not None and val < minimum:
        raise ConfigError(f"field '{where}.{key}' must be >= {minimum}")
    return val


def _array(tab, key, where, ndim, default=None):
    val = tab.get(key, default)
    if val is None:
        raise ConfigError(f"missing field '{where}.{key}'")
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"field '{where}.{key}' must be a numeric array") from None
    if ndim == 2 and arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.ndim != ndim or not np.all(np.isfinite(arr)):
        raise ConfigError(f"field '{where}.{key}' must be a finite {ndim}-d array")
    return arr


@dataclass
class Scenario:
    name: str
    experiment: str
    epsilon: float
    seed: int
    output_dir: str
    system_form: str
    system_params: dict
    system: DiscreteLtiSystem
    constraints: ConstraintSet | None = None
    reference: ReferenceSignal | None = None
    simulation: dict = field(default_factory=dict)
    uncertainty: dict | None = None
    bode: dict = field(default_factory=dict)
    convergence: dict = field(default_factory=dict)


def _system(raw):
    tab = _table(raw, "system", ("pll", "continuous", "discrete"), required=True)
    forms = [k for k in ("pll", "continuous", "discrete") if k in tab]
    if len(forms) != 1:
        raise ConfigError("[system] needs exactly one of the tables pll, continuous, discrete")
    form = forms[0]
    where = f"system.{form}"
    sub = _table(tab, form, {"pll": ("G_lp", "G_vco", "Ts"),
                             "continuous": ("A", "B", "C_tr", "C_st", "D_st", "Ts"),
                             "discrete": ("A", "B", "C_tr", "C_st", "D_st", "Ts")}[form])
    if form == "pll":
        params = {"G_lp": _number(sub, "G_lp", where, 100.0, True),
                  "G_vco": _number(sub, "G_vco", where, 200.0, True),
                  "Ts": _number(sub, "Ts", where, 1e-4, True)}
        return form, params, pll_system(params["G_lp"], params["G_vco"], params["Ts"])
    A = _array(sub, "A", where, 2)
    n = A.shape[0]
    params = {"A": A, "B": _array(sub, "B", where, 1), "C_tr": _array(sub, "C_tr", where, 1)}
    params["C_st"] = _array(sub, "C_st", where, 2, default=np.zeros((0, n)).tolist())
    if params["C_st"].size == 0:
        params["C_st"] = np.zeros((0, n))
    params["D_st"] = _array(sub, "D_st", where, 1, default=[0.0] * params["C_st"].shape[0])
    params["Ts"] = _number(sub, "Ts", where, None if form == "continuous" else 1.0, True)
    try:
        if form == "continuous":
            Ad, Bd = zoh_discretize(A, params["B"].reshape(n, 1), params["Ts"])
        else:
            Ad, Bd = A, params["B"]
        system = DiscreteLtiSystem(Ad, Bd, params["C_tr"], params["C_st"], params["D_st"], params["Ts"])
    except ValueError as exc:
        raise ConfigError(f"[{where}]: {exc}") from None
    return form, params, system


def _reference(raw):
    tab = _table(raw, "reference", ("kind", "level", "steps", "initial", "amplitude", "frequency"))
    if tab is None:
        return None
    kind = tab.get("kind", "constant")
    try:
        if kind == "constant":
            return ReferenceSignal.constant(_number(tab, "level", "reference", 0.0))
        if kind == "step_sequence":
            steps = _array(tab, "steps", "reference", 2)
            if steps.shape[1] != 2:
                raise ConfigError("field 'reference.steps' must hold [time, level] pairs")
            return ReferenceSignal.step_sequence([tuple(s) for s in steps],
                                                 _number(tab, "initial", "reference", 0.0))
        if kind == "sinusoid":
            return ReferenceSignal.sinusoid(_number(tab, "amplitude", "reference", 1.0),
                                            _number(tab, "frequency", "reference", None, True))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[reference]: {exc}") from None
    raise ConfigError(f"field 'reference.kind' must be constant, step_sequence or sinusoid, got {kind!r}")


def build_scenario(raw, experiment=None, overrides=None):
    """Validate a parsed config (plus CLI overrides) into a :class:`Scenario`."""
    overrides = overrides or {}
    extra = set(raw) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown top-level field(s): {', '.join(sorted(extra))}")
    experiment = experiment or raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}, got {experiment!r}")
    name = raw.get("name", "scenario")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\ "):
        raise ConfigError("field 'name' must be a non-empty string without spaces or slashes")
    epsilon = overrides.get("epsilon")
    epsilon = _number(raw, "epsilon", "top", 1e-3) if epsilon is None else float(epsilon)
    seed = overrides.get("seed")
    seed = _integer(raw, "seed", "top", 0) if seed is None else int(seed)
    out = overrides.get("output_dir") or raw.get("output_dir", ".")
    form, params, system = _system(raw)
    sc = Scenario(name, experiment, epsilon, seed, str(out), form, params, system)

    cons = _table(raw, "constraints", ("S", "s"))
    if cons is not None:
        try:
            sc.constraints = ConstraintSet(_array(cons, "S", "constraints", 2), _array(cons, "s", "constraints", 1))
        except ValueError as exc:
            raise ConfigError(f"[constraints]: {exc}") from None
        if sc.constraints.S.shape[1] != system.p:
            raise ConfigError(f"[constraints]: S needs {system.p} columns (one per constrained output)")
    sc.reference = _reference(raw)

    sim = _table(raw, "simulation", ("horizon", "x0", "v0", "governed", "compare_ungoverned")) or {}
    sc.simulation = {
        "horizon": _number(sim, "horizon", "simulation", 0.1, True),
        "x0": _array(sim, "x0", "simulation", 1, [0.0] * system.n),
        "governed": bool(sim.get("governed", True)),
        "compare_ungoverned": bool(sim.get("compare_ungoverned", False)),
    }
    if sc.simulation["x0"].size != system.n:
        raise ConfigError(f"field 'simulation.x0' must have {system.n} entries")
    # default v(-1): the tracking output at the initial state
    sc.simulation["v0"] = _number(sim, "v0", "simulation", float((system.C_tr @ sc.simulation["x0"])[0]))

    unc = _table(raw, "uncertainty", ("parameter", "vertices"))
    if unc is not None:
        if form != "pll" or unc.get("parameter", "G_vco") != "G_vco":
            raise ConfigError("[uncertainty] supports parameter = \"G_vco\" with the pll system form")
        verts = _array(unc, "vertices", "uncertainty", 1)
        if verts.size < 1 or np.any(verts <= 0):
            raise ConfigError("field 'uncertainty.vertices' must list positive G_vco values")
        sc.uncertainty = {"parameter": "G_vco", "vertices": verts}

    bode = _table(raw, "bode", ("n", "omega_min", "omega_max", "amplitude", "discard", "compare_above")) or {}
    sc.bode = {
        "n": _integer(bode, "n", "bode", 100, 1),
        "omega_min": _number(bode, "omega_min", "bode", 10.0, True),
        "omega_max": _number(bode, "omega_max", "bode", 1000.0, True),
        "amplitude": _number(bode, "amplitude", "bode", 1.0, True),
        "discard": _number(bode, "discard", "bode", 0.6),
        "compare_above": _number(bode, "compare_above", "bode", 600.0),
    }
    if not 0.0 <= sc.bode["discard"] < 1.0:
        raise ConfigError("field 'bode.discard' must lie in [0, 1)")

    conv = _table(raw, "convergence", ("n_runs", "omega", "amplitude", "horizon", "x0_ranges", "v0_range")) or {}
    if experiment == "converge":
        default_x0 = [[-2.0, 2.0], [-200.0, 200.0]] if form == "pll" else None
        sc.convergence = {
            "n_runs": _integer(conv, "n_runs", "convergence", 50, 2),
            "omega": _number(conv, "omega", "convergence", 100.0, True),
            "amplitude": _number(conv, "amplitude", "convergence", 1.0, True),
            "horizon": _number(conv, "horizon", "convergence", 0.5, True),
            "x0_ranges": _array(conv, "x0_ranges", "convergence", 2, default_x0),
            "v0_range": _array(conv, "v0_range", "convergence", 1, [-1.0, 1.0]),
        }
        if sc.convergence["x0_ranges"].shape != (system.n, 2) or sc.convergence["v0_range"].shape != (2,):
            raise ConfigError("convergence ranges must be (low, high) pairs, one per state plus v0_range")

    if experiment in ("simulate", "multistep", "robust") and sc.reference is None:
        raise ConfigError(f"experiment '{experiment}' needs a [reference] table")
    if experiment == "multistep" and sc.reference.kind != "step_sequence":
        raise ConfigError("experiment 'multistep' needs reference.kind = \"step_sequence\"")
    if experiment == "robust" and sc.uncertainty is None:
        raise ConfigError("experiment 'robust' needs an [uncertainty] table")
    if not 0.0 < epsilon < 1.0:
        raise ConfigError(f"epsilon must lie in (0, 1), got {epsilon}")
    return sc


# ---------------------------------------------------------------- manifest


def _toml_value(val):
    if isinstance(val, (bool, np.bool_)):
        return "true" if val else "false"
    if isinstance(val, (int, np.integer)):
        return str(int(val))
    if isinstance(val, (float, np.floating)):
        val = float(val)
        if math.isnan(val):
            return "nan"
        if math.isinf(val):
            return "inf" if val > 0 else "-inf"
        return repr(val)
    if isinstance(val, str):
        return json.dumps(val)
    if isinstance(val, np.ndarray):
        val = val.tolist()
    if isinstance(val, (list, tuple)):
        return "[" + ", ".join(_toml_value(v) for v in val) + "]"
    raise TypeError(f"cannot write {type(val).__name__} to the manifest")


def manifest_entries(sc: Scenario, results):
    """Resolved parameters and results as ordered (dotted key, value) pairs."""
    e = [("name", sc.name), ("experiment", sc.experiment), ("epsilon", sc.epsilon),
         ("seed", sc.seed), ("output_dir", sc.output_dir)]
    for k, v in sc.system_params.items():
        e.append((f"system.{sc.system_form}.{k}", v))
    if sc.constraints is not None:
        e += [("constraints.S", sc.constraints.S), ("constraints.s", sc.constraints.s)]
    ref = sc.reference
    if ref is not None:
        e.append(("reference.kind", ref.kind))
        if ref.kind == "constant":
            e.append(("reference.level", ref.level))
        elif ref.kind == "step_sequence":
            e += [("reference.steps", [list(s) for s in ref.steps]), ("reference.initial", ref.initial)]
        else:
            e += [("reference.amplitude", ref.amplitude), ("reference.frequency", ref.frequency)]
    if sc.experiment != "converge":
        for k, v in sc.simulation.items():
            e.append((f"simulation.{k}", v))
    if sc.uncertainty is not None:
        e += [("uncertainty.parameter", sc.uncertainty["parameter"]),
              ("uncertainty.vertices", sc.uncertainty["vertices"])]
    if sc.experiment == "bode":
        for k, v in sc.bode.items():
            e.append((f"bode.{k}", v))
    if sc.experiment == "converge":
        for k, v in sc.convergence.items():
            e.append((f"convergence.{k}", v))
    e.append(("result.package_version", __version__))
    for k, v in results.items():
        e.append((f"result.{k}", v))
    return e


def manifest_text(sc: Scenario, results):
    return "".join(f"{k} = {_toml_value(v)}\n" for k, v in manifest_entries(sc, results))


# ---------------------------------------------------------------- experiments


def _governor(sc: Scenario, pair, static=None):
    return GovernorState(sc.simulation["v0"], pair, static, sc.epsilon)


def _steps(sc: Scenario):
    return max(1, int(round(sc.simulation["horizon"] / sc.system.Ts)))


def _static(sc: Scenario):
    return build_static_mas(sc.system, sc.constraints, sc.epsilon) if sc.constraints is not None else None


def run_mas(sc: Scenario):
    files, res = {}, {}
    pair = build_dynamic_mas_pair(sc.system, sc.epsilon)
    files[f"mas_{sc.name}_minus.csv"] = mas_to_csv(pair.rep_minus)
    files[f"mas_{sc.name}_plus.csv"] = mas_to_csv(pair.rep_plus)
    res["dynamic_minus_index"] = pair.rep_minus.admissibility_index
    res["dynamic_minus_rows"] = pair.rep_minus.n_rows
    res["dynamic_plus_index"] = pair.rep_plus.admissibility_index
    res["dynamic_plus_rows"] = pair.rep_plus.n_rows
    res["dynamic_same_rows"] = rows_equal_as_sets(_unit_h(pair.rep_minus), _unit_h(pair.rep_plus))
    static = _static(sc)
    if static is not None:
        files[f"mas_{sc.name}.csv"] = mas_to_csv(static)
        res["static_index"] = static.admissibility_index
        res["static_rows"] = static.n_rows
    else:
        files[f"mas_{sc.name}.csv"] = mas_to_csv(pair.rep_minus)
    return files, res


def _unit_h(rep):
    # compare the row matrices only; the steady-state bounds differ by design
    return replace(rep, h=np.ones_like(rep.h))


def run_simulate(sc: Scenario):
    files, res = {}, {}
    pair = build_dynamic_mas_pair(sc.system, sc.epsilon)
    static = _static(sc)
    n = _steps(sc)
    governed = sc.simulation["governed"]
    tr = simulate(sc.system, _governor(sc, pair, static), sc.reference, sc.simulation["x0"], n,
                  governed=governed)
    files[f"simulate_{sc.name}.csv"] = tr.to_csv()
    _trace_results(res, "", tr, sc.reference.final, _single_level(sc.reference))
    if sc.simulation["compare_ungoverned"]:
        un = simulate(sc.system, _governor(sc, None), sc.reference, sc.simulation["x0"], n, governed=False)
        files[f"simulate_{sc.name}_ungoverned.csv"] = un.to_csv()
        _trace_results(res, "ungoverned_", un, sc.reference.final, _single_level(sc.reference))
    return files, res


def _single_level(ref):
    """Overshoot against the final level only means something for one step."""
    return ref.kind == "constant" or (ref.kind == "step_sequence" and len(ref.steps) == 1)


def _trace_results(res, prefix, tr, r_final, overshoot=True):
    if overshoot and r_final != 0:
        res[f"{prefix}overshoot"] = overshoot_metric(tr, r_final)
    res[f"{prefix}max_crossing"] = max(c for _, _, c in segment_crossings(tr))
    res[f"{prefix}infeasible_samples"] = int(np.count_nonzero(~tr.feasible))
    if tr.y_st.shape[1]:
        res[f"{prefix}max_abs_y_st"] = float(np.max(np.abs(tr.y_st)))


def run_multistep(sc: Scenario):
    res = {}
    pair = build_dynamic_mas_pair(sc.system, sc.epsilon)
    state = _governor(sc, pair, _static(sc))
    tr = multi_step_experiment(sc.system, state, list(sc.reference.steps), sc.simulation["horizon"],
                               sc.reference.initial, sc.simulation["x0"])
    _trace_results(res, "", tr, sc.reference.final, overshoot=False)
    crossings = segment_crossings(tr)
    res["max_crossing_before_last_step"] = max([c for _, _, c in crossings[:-1]], default=0.0)
    res["last_step_crossing"] = crossings[-1][2]
    bad = np.flatnonzero(~tr.feasible)
    res["first_infeasible_t"] = float(tr.t[bad[0]]) if bad.size else -1.0
    res["kappa_zero_infeasible_samples"] = int(np.count_nonzero(~tr.feasible & (tr.kappa_star == 0.0)))
    r_final = sc.reference.final
    off = np.flatnonzero(np.abs(tr.v - r_final) > 2.0 * sc.epsilon * abs(r_final) + 1e-12)
    res["v_settled_t"] = float(tr.t[off[-1] + 1]) if off.size and off[-1] + 1 < len(tr) else (
        -1.0 if off.size else 0.0)
    return {f"multistep_{sc.name}.csv": tr.to_csv()}, res


def run_bode(sc: Scenario):
    b = sc.bode
    omegas = default_omegas(b["n"], b["omega_min"], b["omega_max"])
    pair = build_dynamic_mas_pair(sc.system, sc.epsilon)
    gov = nonlinear_bode(sc.system, _governor(sc, pair), omegas, b["amplitude"], discard=b["discard"])
    lin = linear_bode(sc.system, omegas, b["amplitude"])
    peak_w, peak_db = linear_peak(sc.system)
    high = [abs(g.magnitude_db - l.magnitude_db) for g, l in zip(gov, lin) if g.omega > b["compare_above"]]
    res = {
        "governed_max_db": max(p.magnitude_db for p in gov),
        "linear_peak_omega": peak_w,
        "linear_peak_db": peak_db,
        "max_abs_diff_db_above": max(high) if high else 0.0,
    }
    return {f"bode_{sc.name}.csv": bode_to_csv(gov), f"bode_{sc.name}_linear.csv": bode_to_csv(lin)}, res


def _vertex_system(sc: Scenario, g_vco):
    p = sc.system_params
    return pll_system(p["G_lp"], float(g_vco), p["Ts"])


def run_robust(sc: Scenario):
    files, res = {}, {}
    verts = [_vertex_system(sc, g) for g in sc.uncertainty["vertices"]]
    usys = UncertainSystem(tuple(verts))
    pair = build_robust_dynamic_pair(usys, sc.epsilon)
    static = build_robust_mas_polytopic(usys, sc.constraints, sc.epsilon) if sc.constraints is not None else None
    files[f"robust_{sc.name}_mas_minus.csv"] = mas_to_csv(pair.rep_minus)
    files[f"robust_{sc.name}_mas_plus.csv"] = mas_to_csv(pair.rep_plus)
    res["dynamic_index"] = pair.rep_minus.admissibility_index
    res["dynamic_rows"] = pair.rep_minus.n_rows
    if static is not None:
        files[f"robust_{sc.name}_mas_static.csv"] = mas_to_csv(static)
        res["static_index"] = static.admissibility_index
        res["static_rows"] = static.n_rows
    traces = vertex_runs(verts, _governor(sc, pair, static), sc.reference, _steps(sc), sc.simulation["x0"])
    for g, tr in zip(sc.uncertainty["vertices"], traces):
        tag = f"{g:g}".replace(".", "p")
        files[f"robust_{sc.name}_vertex_{tag}.csv"] = tr.to_csv()
        _trace_results(res, f"vertex_{tag}_", tr, sc.reference.final, _single_level(sc.reference))
    return files, res


def run_converge(sc: Scenario):
    c = sc.convergence
    pair = build_dynamic_mas_pair(sc.system, sc.epsilon)
    ranges = np.vstack([c["x0_ranges"], c["v0_range"][None, :]])
    traces = convergence_experiment(sc.system, _governor(sc, pair), c["n_runs"], ranges, c["omega"],
                                    c["amplitude"], sc.seed, c["horizon"])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for k, tr in enumerate(traces):
        lines = tr.to_csv().splitlines()
        if k == 0:
            w.writerow(["run"] + lines[0].split(","))
        for line in lines[1:]:
            w.writerow([k] + line.split(","))
    res = {
        "final_window_spread": final_window_spread(traces),
        "runs_with_infeasible_samples": int(sum(bool(np.any(~tr.feasible)) for tr in traces)),
    }
    return {f"converge_{sc.name}.csv": buf.getvalue()}, res


RUNNERS = {"mas": run_mas, "simulate": run_simulate, "multistep": run_multistep, "bode": run_bode,
           "robust": run_robust, "converge": run_converge}


def run(config, experiment=None, overrides=None, out=print):
    """Execute one scenario; returns the list of files written."""
    sc = build_scenario(read_config(config), experiment, overrides)
    files, results = RUNNERS[sc.experiment](sc)
    outdir = Path(sc.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    files[f"run_manifest_{sc.experiment}_{sc.name}.toml"] = manifest_text(sc, results)
    written = []
    for fname in sorted(files):
        path = outdir / fname
        path.write_text(files[fname])
        written.append(path)
    for k, v in results.items():
        out(f"{k} = {_toml_value(v)}")
    for path in written:
        out(f"wrote {path}")
    return written


def validate(config, overrides=None, out=print):
    """Print PASS/FAIL for stability, unit DC gain and epsilon; True when all pass."""
    raw = read_config(config)
    form, _, system = _system(raw)
    eps = (overrides or {}).get("epsilon")
    eps = _number(raw, "epsilon", "top", 1e-3) if eps is None else float(eps)
    rho = system.spectral_radius()
    checks = [("stability", rho < 1.0, f"spectral radius {rho:.12g}")]
    if rho < 1.0:
        gain = system.dc_gain_tr()
        checks.append(("dc_gain", abs(gain - 1.0) <= 1e-9, f"C_tr (I - A)^-1 B = {gain:.12g}"))
    else:
        checks.append(("dc_gain", False, "undefined for an unstable A"))
    checks.append(("epsilon", 0.0 < eps < 1.0, f"epsilon = {eps!r}"))
    for name, ok, detail in checks:
        out(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return all(ok for _, ok, _ in checks)


# ---------------------------------------------------------------- entry point


def _parser():
    p = argparse.ArgumentParser(prog="rgdc", description="Reference governor with dynamic constraint toolkit")
    p.add_argument("--version", action="version", version=f"rgdc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd in EXPERIMENTS + ("run", "validate"):
        sp = sub.add_parser(cmd, help="run the scenario's own experiment" if cmd == "run" else None)
        sp.add_argument("--config", required=True, help="scenario TOML file or built-in scenario name")
        sp.add_argument("--out", help="output directory (overrides output_dir)")
        sp.add_argument("--epsilon", type=float, help="steady-state tightening (overrides epsilon)")
        sp.add_argument("--seed", type=int, help="random seed (overrides seed)")
    sub.add_parser("list", help="list built-in scenarios")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name in builtin_scenarios():
            print(name)
        return 0
    overrides = {"epsilon": args.epsilon, "seed": args.seed, "output_dir": args.out}
    try:
        if args.command == "validate":
            return 0 if validate(args.config, overrides) else 1
        run(args.config, None if args.command == "run" else args.command, overrides)
    except (ConfigError, ConfigurationError, MasConstructionError, LpSolverError, OSError) as exc:
        print(f"rgdc: error: {exc}", file=_sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
