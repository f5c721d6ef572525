import csv
import json

import numpy as np
import pytest
import yaml

from raylab import cli, experiments
from raylab.experiments import ConfigError, validate_config
from raylab.report import Check, RunReport, dumps, emit, format_float

SMALL = {
    "superpose": {"samples": 20},
    "ldli": {"samples": 200, "gauge_draws": 100},
    "ud": {"independent_families": 20, "dependent_families": 20},
    "signal": {"repetitions": [10, 100], "trials": 200, "bob_povms": 20},
    "grover": {"N": 64, "standard_rounds": 6, "crosscheck_max_n": 6},
    "circle": {"grid": [20, 40], "haar_points": 50},
}


def write_config(tmp_path, name, **extra):
    cfg = {"experiment": name, "seed": 11, "params": SMALL[name], **extra}
    path = tmp_path / f"{name}.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return path


def test_check_relations():
    assert Check("a", "", 1e-12, "<", 1e-10).passed
    assert not Check("a", "", float("nan"), "<", 1e-10).passed
    assert Check("a", "", 1.0, ">=", 1.0).passed
    assert not Check("a", "", 1.0, ">", 1.0).passed


def test_dumps_is_stable_and_round_trips():
    obj = {"b": 0.1, "a": [1, 2.5, np.float64(1 / 3)], "c": {"z": True, "y": None}}
    text = dumps(obj)
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    back = json.loads(text)
    assert back["a"][2] == 1 / 3
    assert format_float(0.1) == "0.10000000000000001"


def test_emit_writes_timings_separately(tmp_path):
    rep = RunReport("demo", {"seed": 1})
    rep.check("x", "demo check", 0.5, "<", 1)
    rep.table("t", ["k", "v"], [["a", 1.0]])
    rep.timings["wall_seconds"] = 3.0
    files = emit(rep, "csv", tmp_path)
    assert sorted(f.name for f in files) == ["demo.checks.csv", "demo.config.json", "demo.t.csv"]
    assert (tmp_path / "demo.timings.json").exists()
    with pytest.raises(ValueError):
        emit(rep, "xml", tmp_path)


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("RAYLAB_OUT_DIR", str(tmp_path / "env"))
    files = emit(RunReport("demo", {}), "json")
    assert files[0].parent == tmp_path / "env"


@pytest.mark.parametrize("bad, match", [
    ({"experiment": "nope"}, "unknown experiment"),
    ({"experiment": "ldli"}, "master seed"),
    ({"experiment": "grover", "colour": 1}, "unknown config keys"),
    ({"experiment": "grover", "params": {"M": 3}}, "unknown parameters"),
    ({"experiment": "grover", "tolerances": {"x": -1}}, "positive"),
    ({"experiment": "grover", "output": {"format": "xml"}}, "json or csv"),
    ({"experiment": "grover", "workers": 0}, "workers"),
    ({"experiment": "ldli", "seed": -3}, "unsigned"),
])
def test_config_validation(bad, match):
    with pytest.raises(ConfigError, match=match):
        validate_config(bad)


def test_tolerance_precedence():
    tol = experiments._Tolerances({"*": 1e-3, "a": 1e-5})
    assert tol("a", 1.0) == 1e-5
    assert tol("b", 1.0) == 1e-3
    assert experiments._Tolerances({})("b", 0.5) == 0.5


@pytest.mark.parametrize("name", experiments.EXPERIMENTS)
def test_each_experiment_passes_and_is_byte_identical(tmp_path, name, capsys):
    cfg = write_config(tmp_path, name)
    for run_dir in ("one", "two"):
        assert cli.main([name, "--config", str(cfg), "--out", str(tmp_path / run_dir)]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    a = (tmp_path / "one" / f"{name}.json").read_bytes()
    assert a == (tmp_path / "two" / f"{name}.json").read_bytes()


def test_seed_changes_stochastic_reports(tmp_path):
    cfg = write_config(tmp_path, "ldli")
    cli.main(["ldli", "--config", str(cfg), "--out", str(tmp_path / "a")])
    cli.main(["ldli", "--config", str(cfg), "--seed", "12", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "ldli.json").read_bytes() != (tmp_path / "b" / "ldli.json").read_bytes()


def test_workers_do_not_change_results(tmp_path):
    cfg = write_config(tmp_path, "signal")
    cli.main(["signal", "--config", str(cfg), "--out", str(tmp_path / "a")])
    cli.main(["signal", "--config", str(cfg), "--workers", "4", "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "signal.json").read_bytes() == (tmp_path / "b" / "signal.json").read_bytes()


def test_csv_format(tmp_path):
    cfg = write_config(tmp_path, "grover")
    assert cli.main(["grover", "--config", str(cfg), "--format", "csv", "--out", str(tmp_path)]) == 0
    header = (tmp_path / "grover.checks.csv").read_text().splitlines()[0]
    assert header == "id,description,measured,relation,threshold,passed"
    assert (tmp_path / "grover.super.csv").exists()


def test_failing_check_gives_nonzero_exit(tmp_path):
    cfg = write_config(tmp_path, "grover")
    assert cli.main(["grover", "--config", str(cfg), "--tolerance", "1e-30", "--out", str(tmp_path)]) == 1
    report = json.loads((tmp_path / "grover.json").read_text())
    assert report["passed"] is False


def test_config_errors_give_exit_code_two(tmp_path, capsys):
    assert cli.main(["ldli", "--out", str(tmp_path)]) == 2
    assert "seed" in capsys.readouterr().err
    cfg = write_config(tmp_path, "grover")
    assert cli.main(["ldli", "--config", str(cfg), "--seed", "1", "--out", str(tmp_path)]) == 2
    assert cli.main(["grover", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_json_and_csv_carry_the_same_numbers(tmp_path):
    cfg = write_config(tmp_path, "ud")
    cli.main(["ud", "--config", str(cfg), "--out", str(tmp_path / "j")])
    cli.main(["ud", "--config", str(cfg), "--format", "csv", "--out", str(tmp_path / "c")])
    report = json.loads((tmp_path / "j" / "ud.json").read_text())
    with open(tmp_path / "c" / "ud.checks.csv", newline="") as fh:
        measured = [float(r["measured"]) for r in csv.DictReader(fh)]
    assert measured == [c["measured"] for c in report["checks"]]


def test_ldli_report_carries_witness_records(tmp_path):
    cfg = write_config(tmp_path, "ldli")
    cli.main(["ldli", "--config", str(cfg), "--out", str(tmp_path)])
    witnesses = json.loads((tmp_path / "ldli.json").read_text())["witnesses"]
    assert [w["violation"] for w in witnesses] == [True, False]
