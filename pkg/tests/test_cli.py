import csv
import subprocess
import sys

import numpy as np
import pytest

from rgdc import cli
from rgdc.cli import ConfigError, build_scenario, builtin_scenarios, main, read_config

PLL = """
[system.pll]
G_lp = 100.0
G_vco = 200.0
Ts = 1e-4
"""


def write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def manifest(path):
    return dict(line.split(" = ", 1) for line in path.read_text().splitlines() if " = " in line)


def test_list_builtins(capsys):
    assert main(["list"]) == 0
    names = capsys.readouterr().out.split()
    assert names == builtin_scenarios()
    assert {"pll_mas", "step_response", "multistep", "robust_vertices", "convergence", "bode_sweep"} <= set(names)


def test_mas_builtin(tmp_path):
    assert main(["mas", "--config", "pll_mas", "--out", str(tmp_path)]) == 0
    m = manifest(tmp_path / "run_manifest_mas_pll.toml")
    assert m["result.static_index"] == "130"
    assert m["result.dynamic_minus_index"] == "342"
    assert m["result.dynamic_same_rows"] == "true"
    rows = read_csv(tmp_path / "mas_pll_minus.csv")
    assert len(rows) == int(m["result.dynamic_minus_rows"])


def test_simulate_builtin(tmp_path):
    assert main(["simulate", "--config", "step_response", "--out", str(tmp_path)]) == 0
    gov = read_csv(tmp_path / "simulate_pll_step.csv")
    plain = read_csv(tmp_path / "simulate_pll_step_ungoverned.csv")
    assert len(gov) == len(plain) == 1000
    assert max(float(r["y_tr"]) for r in gov) <= 1 + 1e-8
    assert max(float(r["y_tr"]) for r in plain) > 1.25


def test_multistep_builtin(tmp_path):
    assert main(["multistep", "--config", "multistep", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "multistep_pll_multistep.csv")
    bad = [r for r in rows if r["feasible"] == "0"]
    assert bad and all(float(r["kappa_star"]) == 0.0 for r in bad)


def test_converge_builtin_seeded(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["converge", "--config", "convergence", "--out", str(a), "--seed", "7"]) == 0
    assert main(["converge", "--config", "convergence", "--out", str(b), "--seed", "7"]) == 0
    fa, fb = (d / "converge_pll_converge.csv" for d in (a, b))
    assert fa.read_text() == fb.read_text()
    assert manifest(a / "run_manifest_converge_pll_converge.toml")["seed"] == "7"


def test_bode_builtin(tmp_path):
    assert main(["bode", "--config", "bode_sweep", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "bode_pll_bode.csv")
    assert len(rows) == 100
    assert max(float(r["magnitude_db"]) for r in rows) <= 0.5
    assert len(read_csv(tmp_path / "bode_pll_bode_linear.csv")) == 100


def test_robust_single_vertex(tmp_path):
    cfg = write(tmp_path, f"""
name = "one"
experiment = "robust"
{PLL}
[constraints]
S = [[1.0], [-1.0]]
s = [100.0, 100.0]
[uncertainty]
parameter = "G_vco"
vertices = [200.0]
[reference]
kind = "constant"
level = 1.0
[simulation]
horizon = 0.05
""")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    m = manifest(tmp_path / "run_manifest_robust_one.toml")
    assert m["result.dynamic_index"] == "342"
    rows = read_csv(tmp_path / "robust_one_vertex_200.csv")
    assert max(float(r["y_tr"]) for r in rows) <= 1 + 1e-8


def test_zero_trace(tmp_path):
    cfg = write(tmp_path, f"""
name = "zero"
experiment = "simulate"
{PLL}
[reference]
kind = "constant"
level = 0.0
[simulation]
horizon = 0.01
""")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "simulate_zero.csv")
    assert len(rows) == 100
    assert all(float(r[k]) == 0.0 for r in rows for k in ("r", "v", "y_tr", "y_st_1"))


def test_manifest_round_trip(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    assert main(["multistep", "--config", "multistep", "--out", str(first), "--epsilon", "0.002"]) == 0
    man = first / "run_manifest_multistep_pll_multistep.toml"
    assert main(["run", "--config", str(man), "--out", str(second)]) == 0
    for f in first.iterdir():
        if f.suffix == ".csv":
            assert f.read_bytes() == (second / f.name).read_bytes()
    again = manifest(second / man.name)
    orig = manifest(man)
    assert orig.pop("output_dir") != again.pop("output_dir")
    assert orig == again
    assert orig["epsilon"] == "0.002"


def test_manifest_has_no_timestamp(tmp_path):
    main(["mas", "--config", "pll_mas", "--out", str(tmp_path)])
    lines = (tmp_path / "run_manifest_mas_pll.toml").read_text().splitlines()
    text = "\n".join(line for line in lines if not line.startswith("output_dir"))
    assert "time" not in text.lower() and "date" not in text.lower()


@pytest.mark.parametrize("body, needle", [
    ("experiment = \"simulate\"\n[system.pll]\nG_lp = -1.0\n[reference]\nkind = \"constant\"\nlevel = 1.0\n",
     "G_lp"),
    (f"experiment = \"simulate\"\nbogus = 1\n{PLL}", "bogus"),
    (f"experiment = \"simulate\"\n{PLL}", "reference"),
    (f"experiment = \"robust\"\n{PLL}[reference]\nkind = \"constant\"\nlevel = 1.0\n", "uncertainty"),
    (f"experiment = \"mas\"\nepsilon = 1.5\n{PLL}", "epsilon"),
    ("experiment = \"mas\"\n", "system"),
    (f"experiment = \"fly\"\n{PLL}", "experiment"),
    (f"experiment = \"simulate\"\n{PLL}[reference]\nkind = \"ramp\"\n", "kind"),
    ("experiment = \"mas\"\n[system\n", "line"),
])
def test_config_errors(tmp_path, capsys, body, needle):
    cfg = write(tmp_path, body)
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert err.startswith("rgdc: error:") and needle in err


def test_missing_file(tmp_path, capsys):
    assert main(["mas", "--config", str(tmp_path / "nope.toml")]) == 2
    assert "rgdc: error:" in capsys.readouterr().err


def test_unstable_system_is_construction_error(tmp_path, capsys):
    cfg = write(tmp_path, """
experiment = "mas"
[system.discrete]
A = [[1.5]]
B = [1.0]
C_tr = [1.0]
""")
    assert main(["run", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "rgdc: error:" in capsys.readouterr().err


def test_validate_pass(capsys):
    assert main(["validate", "--config", "pll_mas"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert [line.split()[0] for line in out] == ["PASS"] * 3


def test_validate_fail(tmp_path, capsys):
    cfg = write(tmp_path, """
epsilon = 0.0
[system.discrete]
A = [[1.5]]
B = [1.0]
C_tr = [1.0]
""")
    assert main(["validate", "--config", cfg]) == 1
    out = capsys.readouterr().out
    assert out.count("FAIL") == 3


def test_validate_wrong_dc_gain(tmp_path, capsys):
    cfg = write(tmp_path, """
[system.discrete]
A = [[0.5]]
B = [1.0]
C_tr = [1.0]
""")
    assert main(["validate", "--config", cfg]) == 1
    assert "FAIL dc_gain" in capsys.readouterr().out


def test_continuous_form_matches_pll(tmp_path):
    from rgdc.simkit import pll_continuous, pll_system

    Ac, Bc = pll_continuous()
    raw = {"experiment": "mas", "system": {"continuous": {
        "A": Ac.tolist(), "B": Bc.ravel().tolist(), "C_tr": [1.0, 0.0], "C_st": [[0.0, 1.0]], "Ts": 1e-4}}}
    sc = build_scenario(raw)
    ref = pll_system()
    assert np.allclose(sc.system.A, ref.A, rtol=1e-12, atol=0)
    assert np.allclose(sc.system.B, ref.B, rtol=1e-12, atol=0)


def test_two_system_forms_rejected():
    raw = read_config("pll_mas")
    raw["system"]["discrete"] = {"A": [[0.5]], "B": [0.5], "C_tr": [1.0]}
    with pytest.raises(ConfigError):
        build_scenario(raw)


def test_experiment_override():
    sc = build_scenario(read_config("step_response"), "mas")
    assert sc.experiment == "mas"


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "rgdc.cli", "list"], capture_output=True, text=True)
    assert res.returncode == 0 and "pll_mas" in res.stdout


def test_runners_cover_experiments():
    assert set(cli.RUNNERS) == set(cli.EXPERIMENTS)
