import csv
import json
import math

import pytest

from rotorqec.cli import ConfigError, RunConfig, main


def read_table(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# rotorqec ") and lines[0].endswith(" v1")
    return list(csv.DictReader(lines[1:]))


def run(tmp_path, *argv):
    return main([argv[0], "--out-dir", str(tmp_path), *argv[1:]])


def test_gate_filter_and_forced_failure(tmp_path, capsys):
    assert run(tmp_path, "verify-propagation", "--gate", "CROT") == 0
    rows = read_table(tmp_path / "propagation.csv")
    assert {r["gate"] for r in rows} == {"CROT"}
    assert len(rows) == 4 * 7 * 8
    assert run(tmp_path, "verify-propagation", "--gate", "Z", "--tol", "1e-30") == 1
    assert "FAIL" in capsys.readouterr().out


def test_config_errors(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text('N = "two"\n')
    assert run(tmp_path, "appendix-b", "--config", str(cfg)) == 2
    cfg.write_text("bogus = 1\n")
    assert run(tmp_path, "appendix-b", "--config", str(cfg)) == 2
    assert run(tmp_path, "appendix-b", "--config", str(tmp_path / "missing.toml")) == 2
    assert run(tmp_path, "simulate", "--scheme", "direct", "--N", "0") == 2
    with pytest.raises(SystemExit) as exc:
        run(tmp_path, "simulate", "--prior", "sideways")
    assert exc.value.code == 2
    with pytest.raises(ConfigError, match="^trials:"):
        RunConfig(trials=-1).validate()


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.toml"
    cfg.write_text("trials = 3\nseed = 5\n")
    assert run(tmp_path, "simulate", "--config", str(cfg), "--trials", "2") == 0
    summary = json.loads((tmp_path / "montecarlo.json").read_text())
    assert summary["trials"] == 2 and summary["seed"] == 5


def test_simulate(tmp_path):
    assert run(tmp_path, "simulate", "--trials", "0") == 0
    assert read_table(tmp_path / "montecarlo.csv") == []
    assert json.loads((tmp_path / "montecarlo.json").read_text())["mean_fidelity"] is None
    assert run(tmp_path, "simulate", "--trials", "5") == 0
    assert json.loads((tmp_path / "montecarlo.json").read_text())["mean_fidelity"] == pytest.approx(1)
    args = ("simulate", "--trials", "20", "--prior", "loss", "--gamma", "0.3", "--sigma", "0.2", "--seed", "4")
    run(tmp_path / "a", *args)
    run(tmp_path / "b", *args)
    assert (tmp_path / "a" / "montecarlo.csv").read_bytes() == (tmp_path / "b" / "montecarlo.csv").read_bytes()
    assert run(tmp_path, "simulate", "--scheme", "teleport", "--M", "6", "--trials", "2") == 0


def test_distance(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("alphas = [1.5, 2.5, 3.5]\n")
    assert run(tmp_path, "distance", "--config", str(cfg), "--contrived") == 0
    rows = read_table(tmp_path / "tradeoff.csv")
    ideal = rows[:4]
    assert [int(r["N"]) for r in ideal] == [1, 2, 3, 4]
    assert all(abs(float(r["product"]) - math.pi) < 1e-12 for r in ideal)
    devs = [float(r["phase_deviation"]) for r in rows[4:]]
    assert devs == sorted(devs, reverse=True)
    assert (tmp_path / "contrived.json").exists()
    assert "contrived code" in capsys.readouterr().out
    grid = read_table(tmp_path / "detectability.csv")
    assert {int(r["k"]) for r in grid} == {-2, -1, 0, 1, 2}


def test_gate_check_and_appendix_b(tmp_path):
    assert run(tmp_path, "gate-check", "--gate", "Z", "--gate", "XPrime") == 0
    rows = read_table(tmp_path / "gates.csv")
    assert [r["gate"] for r in rows] == ["Z", "XPrime"]
    assert all(float(r["deviation"]) < 1e-12 for r in rows)
    assert run(tmp_path, "appendix-b") == 0
    rows = read_table(tmp_path / "appendix_b.csv")
    assert rows[2]["gate_coefficients"] == "0 5/6 -3/4 1/6"
