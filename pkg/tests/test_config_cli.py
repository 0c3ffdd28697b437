import json

import pytest
import yaml

from hrsglab import cli
from hrsglab.config import (ConfigError, GainBox, LabConfig, config_digest, config_from_dict,
                            config_to_dict, dump_config, load_config, rng_for)


def test_defaults_round_trip_through_yaml(tmp_path):
    cfg = LabConfig()
    dump_config(cfg, tmp_path / "c.yaml")
    back = load_config(tmp_path / "c.yaml")
    assert back == cfg
    assert config_digest(back) == config_digest(cfg)


def test_overrides_reach_nested_sections():
    cfg = load_config(None, {"pinn.mu": 0.5, "control.baseline.kp": 1.5, "seed": 3})
    assert cfg.pinn.mu == 0.5 and cfg.control.baseline.kp == 1.5 and cfg.seed == 3


@pytest.mark.parametrize("data", [
    {"pinn": {"mu": "abc"}},
    {"pinn": {"nonsense": 1}},
    {"lstm": {"window": 2.5}},
    {"lstm": {"hidden": [50]}},
    {"pinn": {"rate_smoothing": 1}},
    {"gain_box": 3},
])
def test_bad_values_are_rejected(data):
    with pytest.raises(ConfigError):
        config_from_dict(data)


def test_variadic_tuple_accepts_any_length():
    cfg = config_from_dict({"pinn": {"hidden": [8, 4]}})
    assert cfg.pinn.hidden == (8, 4)


def test_yaml_lists_become_tuples():
    cfg = config_from_dict(yaml.safe_load("gain_box: {kp: [0, 4]}"))
    assert cfg.gain_box == GainBox(kp=(0.0, 4.0))


def test_seed_streams_are_independent_and_repeatable():
    a = rng_for(1, "dataset").random(4)
    assert (a == rng_for(1, "dataset").random(4)).all()
    assert not (a == rng_for(1, "lstm_init").random(4)).any()
    assert not (a == rng_for(2, "dataset").random(4)).any()
    with pytest.raises(KeyError):
        rng_for(1, "nope")


def run(argv):
    return cli.main([str(a) for a in argv])


def test_calibrate_writes_profile_and_is_idempotent(tmp_path, capsys):
    assert run(["calibrate", "--out", tmp_path / "a"]) == cli.EXIT_OK
    first = (tmp_path / "a" / "calibration.txt").read_text()
    assert "PASS" in first
    assert run(["calibrate", "--config", tmp_path / "a" / "calibrated.yaml",
                "--out", tmp_path / "b"]) == cli.EXIT_OK
    assert (tmp_path / "b" / "calibration.txt").read_text() == first
    assert ((tmp_path / "b" / "calibrated.yaml").read_text()
            == (tmp_path / "a" / "calibrated.yaml").read_text())


def test_calibrate_infeasible_target_exits_with_config_code(tmp_path, capsys):
    assert run(["calibrate", "--set", "plant.y_target=400", "--out", tmp_path]) == cli.EXIT_CONFIG
    assert "achievable" in capsys.readouterr().err


def test_config_file_is_not_modified(tmp_path):
    path = tmp_path / "c.yaml"
    dump_config(LabConfig(), path)
    before = path.read_bytes()
    run(["calibrate", "--config", path, "--out", tmp_path / "o"])
    assert path.read_bytes() == before


def test_bad_override_exits_with_config_code(tmp_path):
    assert run(["calibrate", "--set", "pinn.mu=abc", "--out", tmp_path]) == cli.EXIT_CONFIG
    assert run(["calibrate", "--set", "pinn.mu", "--out", tmp_path]) == cli.EXIT_CONFIG


def test_missing_lstm_snapshot_exits_with_prerequisite_code(tmp_path, capsys):
    code = run(["run", "--controllers", "lstm", "--scenario", "null",
                "--lstm-model", tmp_path / "none.txt", "--out", tmp_path / "o"])
    assert code == cli.EXIT_MISSING
    assert "hrsglab train" in capsys.readouterr().err


def test_missing_dataset_exits_with_prerequisite_code(tmp_path):
    assert run(["train", "--dataset", tmp_path / "nope", "--out", tmp_path]) == cli.EXIT_MISSING


def test_missing_scenario_file_exits_with_prerequisite_code(tmp_path):
    assert run(["run", "--scenario", tmp_path / "s.yaml", "--out", tmp_path]) == cli.EXIT_MISSING


def test_run_null_pi_gives_near_zero_row(tmp_path):
    out = tmp_path / "null"
    assert run(["run", "--scenario", "null", "--controllers", "pi", "--out", out]) == cli.EXIT_OK
    rows = (out / "kpi.csv").read_text().splitlines()
    assert rows[0] == "controller,iae,mo,ts,cev"
    name, iae, mo, ts, cev = rows[1].split(",")
    assert name == "pi" and float(iae) < 1e-6 and float(mo) < 1e-6
    assert float(ts) == 0.0 and float(cev) < 1e-12
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "run" and man["seed"] == LabConfig().seed
    assert man["config"] == config_to_dict(LabConfig())


def test_run_custom_scenario_and_rerun_without_the_file(tmp_path):
    scen = tmp_path / "s.yaml"
    scen.write_text(yaml.safe_dump({
        "name": "short", "duration": 120.0,
        "setpoint": [[0, 515], [60, 515], [61, 516], [120, 516]],
        "t_gt": [[0, 530], [120, 530]]}))
    out = tmp_path / "o"
    assert run(["run", "--scenario", scen, "--out", out]) == cli.EXIT_OK
    scen.unlink()
    assert run(["rerun", out / "manifest.json"]) == cli.EXIT_OK
    assert (out / "rerun" / "kpi.csv").read_bytes() == (out / "kpi.csv").read_bytes()


def test_rerun_of_missing_manifest_exits_with_prerequisite_code(tmp_path):
    assert run(["rerun", tmp_path / "manifest.json"]) == cli.EXIT_MISSING


def test_gradcheck_cli_passes_and_repeats(tmp_path):
    assert run(["gradcheck", "--out", tmp_path / "a"]) == cli.EXIT_OK
    assert run(["gradcheck", "--out", tmp_path / "b"]) == cli.EXIT_OK
    a = (tmp_path / "a" / "gradcheck.txt").read_text()
    assert a == (tmp_path / "b" / "gradcheck.txt").read_text()
    assert a.rstrip().splitlines()[-1].startswith("PASS")


def test_gradcheck_cli_exits_one_on_a_corrupted_backward(tmp_path, monkeypatch):
    from hrsglab import gradcheck

    real = gradcheck.run_all

    def broken(seed=None):
        res = real(seed)
        bad = gradcheck.ParamCheck("dense", "W1", 1, 1.0, 1.0, 1)
        return [bad, *res[1:]]

    monkeypatch.setattr(gradcheck, "run_all", broken)
    assert run(["gradcheck", "--out", tmp_path]) == cli.EXIT_CHECK_FAILED
    assert "FAIL dense" in (tmp_path / "gradcheck.txt").read_text()
