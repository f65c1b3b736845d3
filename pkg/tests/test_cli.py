import json
import subprocess
import sys

import pytest

from laminar.cli import CONFIG_SCHEMA, run
from laminar.csvio import read_rows


def _cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_graph_command(tmp_path, capsys):
    assert run(["graph", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "structure.json").read_text())
    assert rep["semi_regular"] and rep["connected"] and not rep["bipartite"]
    header, rows = read_rows((tmp_path / "edges.csv").read_text())
    assert header == ["u", "v"] and len(rows) == 120
    assert "profile (2, 2, 2, 2)" in capsys.readouterr().out


def test_spectrum_g1_minimum(tmp_path):
    cfg = _cfg(tmp_path, {"graph": {"layer1_size": 30, "layer2_size": 30,
                                    "profile": {"n1_L1": 2, "n2_L1": 2, "n1_L2": 2, "n2_L2": 2}},
                          "weights": {"w1": 0.1, "w2": 1.0}})
    assert run(["spectrum", "--config", cfg, "--out", str(tmp_path)]) == 0
    header, rows = read_rows((tmp_path / "spectrum.csv").read_text())
    assert rows[0][2] is True and sum(r[2] for r in rows) == 1
    assert (tmp_path / "spectrum.svg").read_text().startswith("<?xml")


def test_quotient_and_hss(tmp_path, capsys):
    assert run(["quotient", "--out", str(tmp_path)]) == 0
    q = json.loads((tmp_path / "quotient.json").read_text())
    assert abs(q["lambda2"] - (q["a"] + q["b"] - 1)) < 1e-11
    assert run(["hss", "--out", str(tmp_path)]) == 0
    h = json.loads((tmp_path / "hss.json").read_text())
    assert h["sign_class"] == "S1"
    out = capsys.readouterr().out
    assert "x0 0.179926197898 0.031358261981 0.0526520306871" in out


def test_stability_verdict(tmp_path):
    cfg = _cfg(tmp_path, {"weights": [{"w1": 0.4, "w2": 1.0}, {"w1": 0.1, "w2": 1.0}]})
    assert run(["stability", "--config", cfg, "--out", str(tmp_path)]) == 0
    v = json.loads((tmp_path / "verdict.json").read_text())
    assert v["converges"] and v["exists"] and v["typeK_ok"]
    assert v["large_scale"]["unstable"] and v["example_inequality"]["unstable"]


def test_sweep_figure_points(tmp_path):
    cfg = _cfg(tmp_path, {"sweep": {"axis1": {"min": 0.4, "max": 1.5, "n": 2},
                                    "axis2": {"min": 0.05, "max": 0.1, "n": 2}}})
    assert run(["sweep", "--config", cfg, "--out", str(tmp_path), "--threads", "2"]) == 0
    _, rows = read_rows((tmp_path / "sweep.csv").read_text())
    table = {(round(r[0], 6), round(r[1], 6)): r for r in rows}
    assert table[(0.4, 0.1)][3:5] == (True, True)
    assert table[(1.5, 0.05)][3:5] == (True, False)
    assert "<svg" in (tmp_path / "regions.svg").read_text()


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["simulate", "--seed", "3", "--t-max", "40"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    for name in ("trajectory.csv", "snapshot.csv", "tissue.svg", "result.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    res = json.loads((a / "result.json").read_text())
    assert res["seed"] == 3 and res["t_final"] <= 40


def test_simulate_quotient_mode(tmp_path):
    cfg = _cfg(tmp_path, {"simulation": {"mode": "quotient"}, "seed": 1})
    assert run(["simulate", "--config", cfg, "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "result.json").read_text())["class"] == "Laminar"


def test_sweep_deterministic_across_threads(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(["sweep", "--grid", "6x5", "--out", str(a)]) == 0
    assert run(["sweep", "--grid", "6x5", "--threads", "3", "--out", str(b)]) == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    assert (a / "regions.svg").read_bytes() == (b / "regions.svg").read_bytes()


def test_verify_command(capsys):
    assert run(["verify", "--seed", "11"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 10


@pytest.mark.parametrize("cfg", [
    {"unknown": 1},
    {"weights": {"w1": -1, "w2": 1}},
    {"graph": {"preset": "nope"}},
    {"kinetics": {"alpha": [1.0]}},
    {"simulation": {"magnitude": 0.5}},
    {"sweep": {"axis1": {"min": 2.0, "max": 1.0, "n": 3}}},
])
def test_config_errors(tmp_path, cfg, capsys):
    assert run(["stability", "--config", _cfg(tmp_path, cfg)]) == 1
    assert "config" in capsys.readouterr().err


def test_infeasible_profile_is_config_error(tmp_path):
    cfg = _cfg(tmp_path, {"graph": {"layer1_size": 30, "layer2_size": 30,
                                    "profile": {"n1_L1": 3, "n2_L1": 2, "n1_L2": 3, "n2_L2": 2}}})
    assert run(["graph", "--config", cfg, "--out", str(tmp_path)]) == 1


def test_bad_flags(tmp_path):
    assert run(["nope"]) == 1
    assert run(["sweep", "--grid", "200x200"]) == 1
    assert run(["sweep", "--grid", "3by3"]) == 1
    assert run(["simulate", "--t-max", "-1"]) == 1
    assert run(["graph", "--config", str(tmp_path / "missing.json")]) == 1


def test_numerical_failure_exit_code(tmp_path, monkeypatch, capsys):
    from laminar import cli
    from laminar.errors import NoConvergence

    def fail(spec):
        raise NoConvergence("steady-state residual too large")
    monkeypatch.setattr(cli, "solve_hss", fail)
    assert run(["hss", "--out", str(tmp_path)]) == 2
    assert "NoConvergence" in capsys.readouterr().err


def test_verify_failure_exit_code(monkeypatch):
    from laminar import verify
    monkeypatch.setattr(verify, "run_all", lambda **kw: [verify.CheckResult("x", False)])
    assert run(["verify"]) == 3


def test_schema_rejects_unknown_nested_keys():
    import jsonschema
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"simulation": {"modee": "large"}}, CONFIG_SCHEMA)


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "laminar", "graph", "--out", str(tmp_path)],
                       capture_output=True, text=True, env={"LAMINAR_LOG": "info", "PATH": ""})
    assert r.returncode == 0
    assert "wrote" in r.stderr
