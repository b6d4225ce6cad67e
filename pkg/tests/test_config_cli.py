import csv
import json
import math

import numpy as np
import pytest

from mcmsurvey.cli import EnsonifiedGrid, main, read_pgm, render_grid, write_pgm
from mcmsurvey.config import ParseError, ValidationError, default_config, parse_config, parse_config_text
from mcmsurvey.dynamics import Trajectory
from mcmsurvey.geometry import ConvexQuad, Rect
from mcmsurvey.risk import post_risk_oracle
from mcmsurvey.sensor import SensorParams

SMALL = """
[points]
kind = lattice
m = 5
seed = 2

[solver]
max_outer = 1
max_inner = 3

[relaxation]
oracle_log2 = 10
max_inflations = 2

[bench]
runs = 2
kinds = lattice
"""


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "mission.ini"
    p.write_text(SMALL)
    return p


def test_defaults_follow_parameter_table():
    cfg = parse_config_text("[sensor]\n")
    s = cfg.sensor.to_degrees()
    expected = dict(lam=20, fom=72, sigma=9, a=5.2, alpha_fov=120, eps_fov=5, eps_de=-6,
                    p_alpha=25, p_eps=400, h=20)
    for k, v in expected.items():
        assert s[k] == pytest.approx(v), k
    assert cfg.unit == 100.0 and cfg.domain.shape == Rect((500, 500), (2500, 2500))
    assert cfg.vehicle.p_max == pytest.approx(math.radians(35))
    assert cfg.settings.max_inner == 200 and cfg.m_risk == 0.05 and not cfg.warm_start


def test_invalid_values_and_keys():
    with pytest.raises(ValidationError):
        parse_config_text("[sensor]\nalpha_fov = -10\n")
    with pytest.raises(ParseError, match="sigmaa") as err:
        parse_config_text("[sensor]\nlam = 20\nsigmaa = 9\n", "m.ini")
    assert "m.ini:3" in str(err.value)
    with pytest.raises(ParseError, match="unknown section"):
        parse_config_text("[sonar]\nx = 1\n")
    with pytest.raises(ParseError):
        parse_config_text("[points]\nm = seven\n")
    with pytest.raises(ValidationError):
        parse_config_text("[relaxation]\nm_risk = 1.5\n")
    with pytest.raises(ValidationError):
        parse_config_text("[points]\nkind = halton\n")
    with pytest.raises(ParseError):
        parse_config("/nonexistent/mission.ini")


def test_quad_domain_and_resolved_echo():
    cfg = parse_config_text("[domain]\nshape = quad\nvertices = 5 5; 25 5; 25 25; 5 25\n"
                            "heading = 90  # north\n")
    assert isinstance(cfg.domain.shape, ConvexQuad)
    assert cfg.heading == pytest.approx(math.pi / 2)
    again = parse_config_text(cfg.to_ini())
    assert again.domain == cfg.domain and again.sensor == cfg.sensor
    assert again.start == cfg.start


def test_start_must_lie_in_domain():
    with pytest.raises(ValidationError):
        parse_config_text("[domain]\nstart = 1, 1\n")
    assert default_config().start == (500.0, 500.0)


def test_points_subcommand(tmp_path, small_cfg):
    out = tmp_path / "pts.csv"
    assert main(["points", "--kind", "sobol2", "--m", "4", "--seed", "3",
                 "--domain", str(small_cfg), "--out", str(out)]) == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 16
    xy = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    assert np.all((xy >= 5) & (xy <= 25)) and {r["shift_index"] for r in rows} == {"0"}


def test_plan_relax_risk_grid_roundtrip(tmp_path, small_cfg, capsys):
    plan_dir, relax_dir = tmp_path / "plan", tmp_path / "relax"
    assert main(["plan", "--config", str(small_cfg), "--out-dir", str(plan_dir)]) == 0
    sol = json.loads((plan_dir / "solution.json").read_text())
    assert {"t_f", "internal_risk", "converged", "iterations"} <= set(sol)
    assert (plan_dir / "resolved.ini").exists() and (plan_dir / "trajectory.csv").exists()

    code = main(["relax", "--config", str(small_cfg), "--out-dir", str(relax_dir),
                 "--resolution", "32"])
    rep = json.loads((relax_dir / "report.json").read_text())
    assert code == (0 if rep["success"] else 3)
    assert rep["initial_domain"] == {"shape": "rect", "lo": [5.0, 5.0], "hi": [25.0, 25.0]}
    assert len(rep["per_iteration"]) == rep["inflations"] + 1
    assert (relax_dir / "domains.csv").read_text().count("\n") == rep["inflations"] + 2
    capsys.readouterr()

    assert main(["risk", "--config", str(small_cfg), "--trajectory",
                 str(relax_dir / "trajectory.csv")]) == 0
    risk = json.loads(capsys.readouterr().out)
    assert risk["risk"] == rep["achieved_risk"]
    assert risk["n_points"] == 1024

    pgm = tmp_path / "seen.pgm"
    assert main(["grid", "--config", str(small_cfg), "--trajectory",
                 str(relax_dir / "trajectory.csv"), "--resolution", "20", "--out", str(pgm)]) == 0
    pix, maxval = read_pgm(pgm)
    assert pix.shape == (20, 20) and maxval == 255
    assert pix.min() >= 0 and pix.max() <= 255
    grid, _ = read_pgm(relax_dir / "grid.pgm")
    assert grid.shape == (32, 32)


def test_bench_subcommand(tmp_path, small_cfg):
    from mcmsurvey import bench

    assert main(["bench", "--config", str(small_cfg), "--runs", "1", "--out-dir",
                 str(tmp_path)]) == 0
    rows = list(csv.DictReader(open(tmp_path / "records.csv")))
    assert len(rows) == 1 and rows[0]["kind"] == "lattice"
    assert {r["metric"] for r in csv.DictReader(open(tmp_path / "summary.csv"))} == set(bench.METRICS)


def test_bad_config_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[sensor]\nsigmaa = 9\n")
    assert main(["plan", "--config", str(bad), "--out-dir", str(tmp_path / "o")]) == 2
    assert "sigmaa" in capsys.readouterr().err


def _straight(y=0.0, t_f=800.0):
    t = np.linspace(0, t_f, 801)
    states = np.stack([2.5 * t, np.full_like(t, y), np.zeros_like(t), np.zeros_like(t)], axis=1)
    return Trajectory(t, states, np.zeros_like(t))


def test_render_grid_far_and_swept():
    sensor = SensorParams()
    far = render_grid(_straight(y=-1e6), Rect((0, 0), (500, 500)), sensor, 8)
    assert np.all(far.values == 1.0)
    # a cell centered 200 m to the side of the track, inside the range band
    near = render_grid(_straight(y=0.0), Rect((900, 190), (920, 210)), sensor, 1)
    assert near.values[0, 0] < 0.05


def test_grid_mean_matches_oracle(lawnmower, domain):
    part = lawnmower.prefix(len(lawnmower.times) * 3 // 4)
    grid = render_grid(part, domain, SensorParams(), 128)
    post = post_risk_oracle(part, domain, SensorParams())
    assert 0.05 < post.value < 0.95
    assert abs(grid.mean() - post.value) <= 3 * post.std_error


def test_pgm_orientation(tmp_path):
    vals = np.array([[1.0, 0.0], [0.5, 0.25]])  # bottom row first
    grid = EnsonifiedGrid(vals, (0, 0), (1, 1), np.ones((2, 2), bool))
    write_pgm(grid, tmp_path / "g.pgm")
    pix, _ = read_pgm(tmp_path / "g.pgm")
    assert pix.tolist() == [[128, 64], [255, 0]]
