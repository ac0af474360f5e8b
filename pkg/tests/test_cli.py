import json

import pytest

from hexactrl import cli, verify
from hexactrl.config import dumps_canonical, load_config
from hexactrl.simulator import ConfigError


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_analyze_nominal(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert cli.main(["analyze", "--samples", "500", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["controllable"] is True
    assert report["cases"]["full_u0"]["controllable"] is True
    assert report["inclusion"]["full"]["violations"] == 0
    assert report["thresholds"] == {}


def test_analyze_failed_rotor(tmp_path, capsys):
    cfg = write(tmp_path, {"faults": [{"time": 1.0, "rotor": 2}]})
    assert cli.main(["analyze", cfg, "--samples", "500"]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["eta"] == [1.0, 0.0, 1.0, 1.0, 1.0, 1.0]
    assert report["cases"]["degraded_ua"]["controllable"] is True
    assert report["thresholds"]["lift_threshold_n"] == pytest.approx(4.17862, abs=1e-5)


def test_analyze_degraded_system(tmp_path, capsys):
    cfg = write(tmp_path, {"analysis": {"system": "degraded", "set_kind": "ua",
                                        "eta": [1, 0, 1, 1, 1, 1], "samples": 200}})
    assert cli.main(["analyze", "--config", cfg]) == 0
    cfg = write(tmp_path, {"params": {"max_lift_n": 4.0},
                           "analysis": {"system": "degraded", "eta": [1, 0, 1, 1, 1, 1], "samples": 200}})
    assert cli.main(["analyze", "--config", cfg, "--set-kind", "ua"]) == 2
    assert cli.main(["analyze", "--config", cfg, "--set-kind", "u0"]) == 0


def test_analyze_report_is_canonical_and_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert cli.main(["analyze", "--samples", "300", "--seed", "4", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.endswith("}\n")
    assert dumps_canonical(json.loads(text)) == text


def test_canonical_floats():
    assert dumps_canonical({"b": 1.0, "a": [0.1, float("nan")], "c": True}) == (
        '{\n  "a": [\n    0.10000000000000001,\n    null\n  ],\n  "b": 1.0,\n  "c": true\n}\n'
    )


def test_errors_exit_one(tmp_path, capsys):
    assert cli.main(["analyze", str(tmp_path / "missing.json")]) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["simulate", str(bad)]) == 1
    assert cli.main(["simulate", write(tmp_path, {"duration": -1})]) == 1
    assert cli.main(["simulate", write(tmp_path, {"wings": 2})]) == 1
    unsorted = {"faults": [{"time": 2, "rotor": 1}, {"time": 1, "rotor": 2}], "duration": 0.01}
    assert cli.main(["simulate", write(tmp_path, unsorted)]) == 1
    assert cli.main(["simulate"]) == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        load_config({"params": {"rotor_count": 8}})
    with pytest.raises(ConfigError):
        load_config({"faults": [{"time": 0, "rotor": 9}]})


def test_bundled_scenarios_validate():
    for name in ("fig2", "fig3", "fig4", "fig5"):
        doc = load_config(name)
        assert doc["expected_classification"] in ("Converged", "Diverged", "SaturationLimited")


def test_threshold_table(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert cli.main(["threshold", "--rotor", "3", "--out", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].split("\t") == ["rotor", "K_star_n", "K_analytic_n", "T_star_n", "T_analytic_n"]
    row = lines[1].split("\t")
    assert row[0] == "3"
    assert float(row[1]) == pytest.approx(float(row[2]), rel=1e-6)
    assert float(row[3]) == pytest.approx(22.05, rel=1e-6)
    assert json.loads(out.read_text())["params"]["max_lift_n"] == 6.125


def test_simulate_writes_outputs(tmp_path, capsys):
    cfg = write(tmp_path, {"faults": [{"time": 0.2, "rotor": 2}], "duration": 0.5})
    csv_path, svg_path = tmp_path / "run.csv", tmp_path / "run.svg"
    assert cli.main(["simulate", cfg, "--csv", str(csv_path), "--svg", str(svg_path), "--decimation", "50"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("classification\t")
    assert len(csv_path.read_text().splitlines()) == 11
    assert svg_path.read_text().lstrip().startswith("<?xml")
    first = svg_path.read_bytes()
    assert cli.main(["simulate", cfg, "--svg", str(svg_path)]) == 0
    assert svg_path.read_bytes() == first


def test_simulate_dcs_override(tmp_path, capsys):
    cfg = write(tmp_path, {"faults": [{"time": 0.1, "rotor": 2}], "duration": 0.3})
    cli.main(["simulate", cfg, "--dcs", "off", "--csv", str(tmp_path / "off.csv")])
    header, *rows = (tmp_path / "off.csv").read_text().splitlines()
    n_col = header.split(",").index("N")
    assert all(r.split(",")[n_col] != "nan" for r in rows)


def test_sweep(tmp_path, capsys):
    svg = tmp_path / "sweep.svg"
    assert cli.main(["sweep", "--points", "9", "--svg", str(svg)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "max_lift_n,controllable_ua,margin_ua,controllable_u0,margin_u0"
    flags = [int(l.split(",")[1]) for l in lines[1:]]
    assert len(flags) == 9 and flags == sorted(flags) and flags[0] == 0 and flags[-1] == 1
    assert svg.exists()


def test_verify_paper_exit_codes(monkeypatch, capsys):
    ok = verify.CheckResult("a", True, "fine")
    bad = verify.CheckResult("b", False, "off")
    monkeypatch.setattr(verify, "run_all", lambda params=None: [ok])
    assert cli.main(["verify-paper"]) == 0
    monkeypatch.setattr(verify, "run_all", lambda params=None: [ok, bad])
    assert cli.main(["verify-paper"]) == 2
    out = capsys.readouterr().out
    assert "PASS  a: fine" in out and "FAIL  b: off" in out and "1/2 checks passed" in out
