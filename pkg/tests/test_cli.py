import json
import math
from pathlib import Path

import pytest

from vortexring import cli
from vortexring.errors import VortexRingError


def test_usage_error_empty(capsys):
    with pytest.raises(SystemExit):
        cli.main([])


def test_unknown_option():
    with pytest.raises(SystemExit):
        cli.main(["tf", "--no-such-flag"])


def test_tf_pipeline(tmp_path):
    rc = cli.main(["tf", "--epsilon", "0.05", "--omega1", "0.0",
                   "--out", str(tmp_path)])
    assert rc == 0
    record = json.loads((tmp_path / "tf.json").read_text())
    assert record["tf"]["r_h"] == pytest.approx(0.45114, abs=1e-4)
    assert record["config"]["epsilon"] == 0.05
    assert record["regime"]["omega"] == pytest.approx(28.335, abs=1e-3)
    csv_lines = (tmp_path / "tf_density.csv").read_text().splitlines()
    assert csv_lines[0] == "r,rho_tf"
    assert len(csv_lines) > 100


def test_tf_pipeline_no_hole_surfaced(tmp_path, capsys):
    # the desk-scale guard: (eps=0.05, Omega_1=0.1) has no hole
    rc = cli.main(["tf", "--epsilon", "0.05", "--omega1", "0.1",
                   "--out", str(tmp_path)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "no central hole" in err
    assert "largest epsilon" in err


def test_config_file_roundtrip(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(
        "# experiment\nepsilon = 0.05\nomega1 = 0.0\ngrid_r = 512\n")
    rc = cli.main(["tf", "--config", str(cfg_file), "--out", str(tmp_path)])
    assert rc == 0
    record = json.loads((tmp_path / "tf.json").read_text())
    assert record["config"]["grid_r"] == 512


def test_experiment_config_roundtrip():
    config = cli.ExperimentConfig(pipeline="tf", epsilon=0.04, omega1=0.02,
                                  sweep_epsilon=(0.05, 0.03))
    clone = cli.ExperimentConfig.from_dict(
        json.loads(json.dumps(config.as_dict())))
    assert clone == config


def test_giant_vortex_pipeline(tmp_path):
    rc = cli.main(["giant-vortex", "--epsilon", "0.05", "--omega1", "0.0",
                   "--grid-r", "512", "--out", str(tmp_path)])
    assert rc == 0
    record = json.loads((tmp_path / "giant_vortex.json").read_text())
    assert record["omega"] == 7
    assert abs(record["state"]["energy"]) > 0
    header = (tmp_path / "giant_vortex_profile.csv").read_text().splitlines()[0]
    assert header == "r,g2,residual"


def test_cost_pipeline_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        rc = cli.main(["cost", "--epsilon", "0.05", "--omega1", "0.03",
                       "--grid-r", "512", "--seed", "3", "--out", str(out)])
        assert rc == 0
    rec1 = json.loads((out1 / "cost.json").read_text())
    rec2 = json.loads((out2 / "cost.json").read_text())
    rec1["config"].pop("out")
    rec2["config"].pop("out")
    # byte-identical up to the output path itself
    assert json.dumps(rec1, sort_keys=True) == json.dumps(rec2, sort_keys=True)
    assert (out1 / "cost.csv").read_bytes() == (out2 / "cost.csv").read_bytes()


def test_sweep_requires_two_points(tmp_path):
    config = cli.ExperimentConfig(pipeline="sweep", out=str(tmp_path))
    with pytest.raises(VortexRingError):
        cli.run_sweep(config)


def test_unknown_pipeline():
    config = cli.ExperimentConfig(pipeline="bogus")
    with pytest.raises(VortexRingError):
        cli.run(config)


def test_verify_all_supercritical_smoke(tmp_path):
    # exercises the full verify-all surface with tight wall-clock budgets;
    # supercritical, so no trial function and no ring comparison
    config = cli.ExperimentConfig(
        pipeline="verify-all", epsilon=0.05, omega1=-0.05, grid_r=512,
        res_tol=3e-3, max_seconds=8.0, out=str(tmp_path), seed=1)
    verdict = cli.run_verify_all(config)
    assert (tmp_path / "verdict.json").exists()
    assert verdict["identity_checks"]["gv_mass_error"] < 1e-8
    assert "vortices" in verdict
    assert "trial" not in verdict
    assert verdict["trend_values"]["omega_ratio"] > 0.5


def test_sweep_smoke_supercritical(tmp_path):
    # two supercritical points with tight budgets; exercises the verdict
    # table with its trend columns
    config = cli.ExperimentConfig(
        pipeline="sweep", epsilon=0.05, grid_r=512, res_tol=3e-3,
        max_seconds=6.0, out=str(tmp_path), seed=1,
        sweep_epsilon=(0.05,), sweep_omega1=(-0.05, -0.08))
    record = cli.run_sweep(config)
    assert len(record["points"]) == 2
    table = (tmp_path / "sweep.csv").read_text().splitlines()
    assert table[0].startswith("epsilon,omega1,status")
    assert len(table) == 3
    assert all(",ok," in line for line in table[1:])
