import math

import pytest

import longi_readout as lr


def test_design_values():
    p = lr.SystemParams.reference_point()
    assert lr.eval_poly_gc(p, p.t_f / 2) == pytest.approx(2296.875 * p.kappa, rel=1e-12)
    expected = 3150 * math.pi * p.kappa * math.sin(math.pi / 6) * math.cos(math.pi / 6) ** 5
    assert lr.eval_trig_gc(p, p.t_f / 3) == pytest.approx(expected, rel=1e-12)
    gc = lr.poly_modulation(p)
    assert lr.verify_boundaries(gc, p, 1e-9)["passed"]
    assert lr.euler_lagrange_residual(gc, lr.gz_from_gc(gc, p.omega_r), p.omega_r) < 1e-8


def test_readout_chain():
    p = lr.SystemParams.reference_point()
    grid = lr.uniform_grid(p.t_f, 501)
    sta = lr.pointer_separation(lr.make_trajectory(lr.trig_modulation(p), p.kappa, grid))[-1]
    base = lr.pointer_separation(lr.make_trajectory(lr.baseline(p), p.kappa, grid))[-1]
    assert sta / base >= 10
    traj = lr.make_trajectory(lr.trig_modulation(p), p.kappa, grid)
    taus = [p.t_f * (i + 1) / 50 for i in range(50)]
    phi = lr.DEFAULT_HOMODYNE_ANGLE
    vac = lr.snr_curve(traj, phi, taus)
    sq = lr.snr_curve(traj, phi, taus, lr.SqueezeSpec.from_db(20.0, phi - math.pi / 2, phi))
    for a, b in zip(vac.snr, sq.snr):
        assert b / a == pytest.approx(10.0, rel=1e-10)


def test_bessel_and_average():
    assert lr.bessel_j(1, 1.0) == pytest.approx(lr.bessel_j_series(1, 1.0), abs=1e-10)
    avg, target, ok = lr.magnus_average(2.0 / lr.bessel_j_series(1, 1.0), 1.0, 50.0, 2.0, 1.0)
    assert ok
    assert avg == pytest.approx(target, abs=1e-8)


def test_reports():
    rep = lr.circuit_report()
    assert rep["g_z"]["target"] == pytest.approx(2 * math.pi * 2.57e9)
    mt = lr.minimal_time(lr.SystemParams.reference_point())
    assert mt["t_zero_return"] == pytest.approx(1 / 6.6e9)


def test_ga_small_run_is_reproducible():
    p = lr.SystemParams.reference_point()
    cfg = {"population": 20, "generations": 3, "grid_points": 129, "seed": 5}
    a = lr.ga_run(p, cfg)
    b = lr.ga_run(p, cfg)
    assert a == b
    assert a["final_snr"] >= a["incumbent_snr"]


def test_experiment_and_errors(tmp_path):
    cfg = {"schema_version": 1, "scenario": "DesignPoly", "grid_points": 201, "tau_points": 40,
           "output_dir": str(tmp_path)}
    out = lr.run_experiment(cfg)
    names = {f["name"] for f in out["files"]}
    assert {"modulation.csv", "trajectory.csv", "snr.csv", "summary.json"} <= names
    assert out["summary"]["boundary_passed"] is True
    assert lr.config_digest(cfg) == lr.config_digest(dict(cfg, output_dir="elsewhere"))

    with pytest.raises(lr.ConfigError) as err:
        lr.run_experiment(dict(cfg, bogus=1))
    info = lr.error_info(err.value)
    assert info["kind"] == "schema" and info["field"] == "/bogus"
    with pytest.raises(lr.LongiError):
        lr.eval_poly_gc(lr.SystemParams.reference_point(), -1.0)
