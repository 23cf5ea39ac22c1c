import csv
import json
import os

import pytest

from shaipa.cli import main
from shaipa.config import load_config, parse_config
from shaipa.exceptions import ConfigError

CONFIGS = os.path.join(os.path.dirname(__file__), os.pardir, "configs")


def cfg_path(name):
    return os.path.join(CONFIGS, name)


def write_cfg(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def test_dump_config_round_trip(tmp_path, capsys):
    assert main(["simulate", "--config", cfg_path("sfm-optimize.json"), "--dump-config"]) == 0
    dumped = capsys.readouterr().out
    again = parse_config(json.loads(dumped))
    assert again == load_config(cfg_path("sfm-optimize.json"))
    assert again.dumps() == dumped.rstrip("\n")


def test_seed_override(capsys):
    assert main(["ipa", "--config", cfg_path("sfm.json"), "--seed", "11", "--dump-config"]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 11


def test_simulate_deterministic(tmp_path):
    assert main(["simulate", "--config", cfg_path("deterministic-sfm.json"), "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "path.csv")))
    events = [r for r in rows if r["event_id"] not in ("", "0")]
    assert {r["event_id"] for r in events} == {"2"}
    assert float(events[0]["t"]) == pytest.approx(1.0)


def test_ipa_deterministic(tmp_path):
    assert main(["ipa", "--config", cfg_path("deterministic-sfm.json"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "ipa.json").read_text())
    assert doc["costs"]["workload"]["dL_dtheta_raw"] == pytest.approx([2.0])
    assert doc["costs"]["loss"]["dL_dtheta_raw"] == pytest.approx([-1.0])


def test_ipa_matches_closed_form_on_random_path(tmp_path):
    assert main(["ipa", "--config", cfg_path("sfm.json"), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "ipa.json").read_text())
    assert doc["costs"]["workload"]["dL_dtheta_raw"][0] == pytest.approx(doc["counters"]["workload_closed_form"],
                                                                         abs=1e-9)
    assert doc["costs"]["loss"]["dL_dtheta_raw"][0] == pytest.approx(doc["counters"]["loss_closed_form"], abs=1e-9)


def test_ipa_theta_free_model(tmp_path):
    p = write_cfg(tmp_path, {"model": "two-mode-buffer", "theta": [1.0], "horizon": 10.0,
                             "integrator": {"step": 0.5}})
    assert main(["ipa", "--config", p, "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "ipa.json").read_text())
    assert doc["costs"]["workload"]["dL_dtheta_raw"] == [0.0]


def test_validate_deterministic(tmp_path):
    assert main(["validate", "--config", cfg_path("deterministic-sfm.json"), "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "validate.csv")))
    assert all(float(r["rel_err"]) < 1e-6 for r in rows)


def test_optimize_pinned(tmp_path):
    doc = json.load(open(cfg_path("sfm-optimize.json")))
    doc["optimize"].update(iters=3, replications=1, bounds=[[1.0, 1.0]])
    doc["horizon"] = 10.0
    assert main(["optimize", "--config", write_cfg(tmp_path, doc), "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "trace.csv")))
    assert [float(r["theta_0"]) for r in rows] == [1.0, 1.0, 1.0]


def test_classify_output(capsys):
    assert main(["classify", "--config", cfg_path("sfm.json")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 5
    assert out[3].startswith("E4") and out[3].endswith("exogenous")


@pytest.mark.parametrize("patch", [
    {"horizon": 0},
    {"theta": []},
    {"validate": {"h": 0}},
    {"colour": "red"},
    {"model": "tandem"},
    {"model_params": {"x0": 9.0}},
    {"theta": [1.0, 2.0]},
    {"integrator": {"step": -1}},
    {"optimize": {"bounds": [[2.0, 1.0]]}},
])
def test_config_errors_exit_2(tmp_path, patch):
    doc = json.load(open(cfg_path("sfm.json")))
    doc.update(patch)
    assert main(["validate", "--config", write_cfg(tmp_path, doc), "--out", str(tmp_path)]) == 2


def test_missing_and_malformed_config(tmp_path):
    assert main(["simulate"]) == 2
    assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["simulate", "--config", str(bad)]) == 2
    with pytest.raises(ConfigError):
        load_config(str(bad))


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


@pytest.mark.parametrize("name,assumption", [
    ("tangential-contact.json", "Assumption 4"),
    ("simultaneous-clocks.json", "Assumption 2"),
    ("chattering-switch.json", "Assumption 3"),
])
def test_assumption_violations_exit_3(tmp_path, capsys, name, assumption):
    assert main(["simulate", "--config", cfg_path(name), "--out", str(tmp_path)]) == 3
    assert assumption in capsys.readouterr().err


def test_validation_failure_exits_4(tmp_path):
    # independent streams with a tiny step make FD noise dominate
    doc = json.load(open(cfg_path("sfm.json")))
    doc["validate"] = {"h": 1e-5, "mode": "independent", "replications": 3}
    assert main(["validate", "--config", write_cfg(tmp_path, doc), "--out", str(tmp_path)]) == 4
