import json
import os

import numpy as np
import pytest

from zcontrol.cli import EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, main
from zcontrol.config import (ConfigurationError, apply_overrides, build_scenario, dump_config,
                             parse_boxes, parse_config_text)
from zcontrol.presets import PRESETS, get_preset
from zcontrol.runner import read_csv, run_scenario, sweep_lambda

SMALL = ["--set", "sim.T=0.2", "--set", "sim.record_every=20"]


def test_config_round_trip():
    settings = get_preset("cs2_indirect_pos").settings
    again = parse_config_text(dump_config(settings))
    assert again == settings
    sc = build_scenario(again)
    assert sc.model.order == 2 and sc.sim.control.mode == "vel_via_pos"


@pytest.mark.parametrize("override", ["model.order=x", "nope.key=1", "model.order", "sim.dt=inf",
                                      "control.stage_solve=maybe"])
def test_bad_overrides(override):
    with pytest.raises(ConfigurationError):
        apply_overrides({}, [override])


def test_parse_boxes():
    assert parse_boxes("-1:1, 0:2.5") == ((-1.0, 1.0), (0.0, 2.5))
    with pytest.raises(ConfigurationError):
        parse_boxes("1-2")


@pytest.mark.parametrize("name", list(PRESETS))
def test_every_preset_variant_validates(name):
    for _, settings in PRESETS[name].variant_settings():
        build_scenario(settings)


def test_unknown_preset():
    with pytest.raises(ConfigurationError):
        get_preset("nope")


def test_run_writes_artifacts(tmp_path):
    code = main(["run", "--preset", "cs2_indirect_pos", "--out", str(tmp_path)] + SMALL)
    assert code == EXIT_OK
    out = tmp_path / "cs2_indirect_pos"
    gamma = read_csv(out / "gamma.csv")
    assert gamma.shape == (11, 2) and np.allclose(gamma[:, 0], np.arange(11) * 0.02)
    controls = read_csv(out / "controls.csv")
    assert controls.shape == (11 * 10 * 2, 4)
    traj = read_csv(out / "trajectory.csv")
    assert traj.shape == (11 * 2 * 10 * 2, 5)
    diag = read_csv(out / "diagnostics.csv")
    assert np.all(diag[:, 1] == 17)
    rep = json.loads((out / "report.json").read_text())
    assert rep["rank_expected"] == [17] and rep["max_average_drift"] < 1e-10
    with open(out / "gamma.csv") as fh:
        assert fh.readline().strip() == "t,gamma"


def test_csv_round_trip_is_exact(tmp_path):
    sc = build_scenario(apply_overrides(get_preset("hk_direct").settings, ["sim.T=0.05", "sim.record_every=5"]))
    run_scenario(sc, str(tmp_path))
    from zcontrol.integrate import simulate
    tr = simulate(sc.model, sc.kernel, sc.sim)
    gamma = read_csv(tmp_path / "gamma.csv")
    assert np.array_equal(gamma[:, 1], tr.gamma)
    traj = read_csv(tmp_path / "trajectory.csv")
    assert np.array_equal(traj[:, 4], tr.states.ravel())


def test_variant_presets_get_subdirectories(tmp_path):
    code = main(["run", "--preset", "cs2_uncontrolled", "--out", str(tmp_path)] + SMALL)
    assert code == EXIT_OK
    assert sorted(os.listdir(tmp_path / "cs2_uncontrolled")) == ["beta=0.1_T=50", "beta=1_T=20"]


def test_out_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ZC_OUT_DIR", str(tmp_path))
    assert main(["run", "--preset", "hk_direct"] + SMALL) == EXIT_OK
    assert (tmp_path / "hk_direct" / "report.json").exists()


def test_config_file_and_seed(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(get_preset("hk_direct").export())
    assert main(["run", "--config", str(cfg), "--seed", "4", "--out", str(tmp_path)] + SMALL) == EXIT_OK


@pytest.mark.parametrize("argv", [
    ["run", "--preset", "cs2_indirect_pos", "--set", "model.agents=1", "--set", "model.dim=2"],
    ["run", "--preset", "cs2_indirect_d3", "--set", "model.agents=2"],
    ["run", "--preset", "nope"],
    ["run"],
    ["validate", "--preset", "cs3_indirect_vel", "--set", "model.order=2"],
    ["run", "--config", "/nonexistent.ini"],
])
def test_config_errors_exit_2(argv, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)] if argv[0] == "run" else argv) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err
    assert not any(tmp_path.rglob("gamma.csv"))


def test_blow_up_exits_3(tmp_path):
    code = main(["run", "--preset", "hk_direct", "--out", str(tmp_path), "--set", "control.lambda=1e300",
                 "--set", "sim.dt=1", "--set", "sim.T=5"])
    assert code == EXIT_BLOWUP
    rep = json.loads((tmp_path / "hk_direct" / "report.json").read_text())
    assert rep["status"].startswith("blow-up")


def test_presets_verbs(capsys):
    assert main(["presets", "list"]) == EXIT_OK
    assert "rank_table" in capsys.readouterr().out
    assert main(["presets", "export", "cs3_direct"]) == EXIT_OK
    text = capsys.readouterr().out
    assert parse_config_text(text)["control.mode"] == "direct"
    assert main(["presets", "show"]) == EXIT_CONFIG


def test_rank_run(tmp_path):
    code = main(["run", "--preset", "rank_table", "--out", str(tmp_path),
                 "--set", "model.agents=20", "--set", "rank.dims=2,3"])
    assert code == EXIT_OK
    rows = read_csv(tmp_path / "rank_table" / "ranks.csv")
    assert rows[:, 3].tolist() == rows[:, 4].tolist() == [37, 54]


def test_sweep(tmp_path, capsys):
    sc = build_scenario(apply_overrides(get_preset("hk_direct").settings, ["sim.dt=0.01"]))
    rows, lam_max = sweep_lambda(sc, [0.1, 1.0, 2.0], threshold=1e-6, horizon=8.0, jobs=2,
                                 out_dir=str(tmp_path))
    assert [r.converged for r in rows] == [False, True, True] and lam_max == 2.0
    assert (tmp_path / "sweep.csv").exists() and (tmp_path / "lambda=2" / "gamma.csv").exists()
    code = main(["sweep", "--preset", "hk_direct", "--lambdas", "0.5,1", "--horizon", "2",
                 "--out", str(tmp_path), "--set", "sim.dt=0.01"])
    assert code == EXIT_OK and "lambda_max=" in capsys.readouterr().out
    assert main(["sweep", "--preset", "hk_direct", "--lambdas", "x"]) == EXIT_CONFIG
