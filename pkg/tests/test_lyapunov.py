import json

import numpy as np
import pytest

from z4lab.eigen import eig3
from z4lab.formats import pgm_bytes, read_pgm, write_heatmap
from z4lab.integrator import integrate
from z4lab.lyapunov import (LYAPUNOV_TOLERANCES, LyapunovConfig, SweepGrid, launch_point,
                            lyapunov_spectrum, mean_divergence, run_sweep, sweep_csv_text,
                            system_field)
from z4lab.systems import PhysParams, SystemCoefficients, general_field, linear_field

SHORT = LyapunovConfig(t_transient=20.0, t_total=200.0)


def small_grid(**kw):
    return SweepGrid("gamma", (0.05, 0.09), 3, "beta", (0.0015, 0.16), 2,
                     fixed={"mu": 0.02}, **kw)


def test_linear_diagonal():
    f = linear_field(np.diag([-1.0, -2.0, -3.0]))
    res = lyapunov_spectrum(f, [1.0, 1.0, 1.0], LyapunovConfig(t_transient=10.0, t_total=200.0))
    np.testing.assert_allclose(res.exponents, [-1, -2, -3], atol=1e-3)
    assert not res.divergent


def test_fewer_exponents():
    f = linear_field(np.diag([-1.0, -2.0, -3.0]))
    cfg = LyapunovConfig(t_transient=10.0, t_total=200.0, n_exponents=2)
    res = lyapunov_spectrum(f, [1.0, 1.0, 1.0], cfg)
    np.testing.assert_allclose(res.exponents, [-1, -2], atol=1e-3)


def test_lorenz_pair_point_is_chaotic(concrete):
    f, eq = system_field("normal_form", concrete, {"gamma": 0.07, "beta": 0.16, "mu": 0.02})
    res = lyapunov_spectrum(f, launch_point(f, eq), LyapunovConfig(t_transient=200.0,
                                                                    t_total=2000.0))
    assert res.top > 5e-3


def test_stable_equilibrium_matches_eigenvalues(concrete):
    # mu < 0: O attracts; eigenvalues -gamma +- i beta and mu
    f = general_field(concrete, PhysParams(0.05, 0.1, -0.02))
    res = lyapunov_spectrum(f, [0.01, 0.01, 0.01], LyapunovConfig(t_transient=200.0,
                                                                   t_total=2000.0))
    ref = np.sort(eig3(f.jacobian(np.zeros(3))).real)[::-1]
    np.testing.assert_allclose(res.exponents, ref, atol=1e-3)


def test_sum_equals_mean_divergence():
    # modified coefficients so that trace J varies along the orbit
    c = SystemCoefficients.concrete().replace(a1=complex(-0.3, 0.1), a3=complex(-0.1, 0.2))
    f = general_field(c, PhysParams(0.07, 0.16, 0.02))
    s0 = np.array([0.01, 0.02, 0.3])
    cfg = LyapunovConfig(t_transient=200.0, t_total=3000.0)
    res = lyapunov_spectrum(f, s0, cfg)
    traj = integrate(f, s0, (0.0, cfg.t_total), LYAPUNOV_TOLERANCES)
    div = mean_divergence(f, traj, cfg.t_transient)
    assert res.exponents.sum() == pytest.approx(div, rel=0.02)


def test_renorm_interval_halving(concrete):
    f, eq = system_field("normal_form", concrete, {"gamma": 0.07, "beta": 0.16, "mu": 0.02})
    s0 = launch_point(f, eq)
    a = lyapunov_spectrum(f, s0, LyapunovConfig(t_transient=200.0, t_total=2000.0))
    b = lyapunov_spectrum(f, s0, LyapunovConfig(t_transient=200.0, t_total=2000.0,
                                                 renorm_dt=0.5))
    assert np.max(np.abs(a.exponents - b.exponents)) < 2e-3


def test_escape_is_divergent(concrete):
    f = general_field(concrete, PhysParams(-0.05, 0.1, -0.02))
    res = lyapunov_spectrum(f, [0.01, 0.01, 0.01], LyapunovConfig(t_transient=50.0,
                                                                   t_total=500.0))
    assert res.divergent
    assert res.t_reached < 500.0
    assert np.all(np.isfinite(res.exponents))


def test_config_validation():
    for kw in ({"t_transient": 10.0, "t_total": 5.0}, {"t_transient": 0.0},
               {"renorm_dt": 0.0}, {"n_exponents": 4}):
        with pytest.raises(ValueError):
            LyapunovConfig(**kw)


def test_grid_validation():
    with pytest.raises(ValueError):
        SweepGrid("gamma", (0, 1), 0, "beta", (0, 1), 2, fixed={"mu": 0.02})
    with pytest.raises(ValueError):
        SweepGrid("gamma", (0, float("inf")), 2, "beta", (0, 1), 2, fixed={"mu": 0.02})
    with pytest.raises(ValueError):
        SweepGrid("gamma", (0, 1), 2, "beta", (0, 1), 2)
    with pytest.raises(ValueError):
        SweepGrid("rho", (0, 1), 2, "beta", (0, 1), 2, fixed={"mu": 0.02})


def test_grid_cells_row_major():
    g = small_grid()
    cells = g.cells()
    assert [(i, j) for i, j, _ in cells] == [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)]
    assert cells[4][2] == {"mu": 0.02, "gamma": 0.07, "beta": 0.16}


def test_workers_give_identical_csv():
    g = small_grid()
    a = sweep_csv_text(run_sweep(g, SHORT, workers=1))
    b = sweep_csv_text(run_sweep(g, SHORT, workers=3))
    assert a == b
    assert a.splitlines()[0] == "i,j,gamma,beta,le1,le2,le3,label"
    assert len(a.splitlines()) == 7


def test_interrupted_sweep_resumes_identically(tmp_path):
    g = small_grid()
    full = sweep_csv_text(run_sweep(g, SHORT))
    ck = tmp_path / "ck.jsonl"
    part = run_sweep(g, SHORT, checkpoint=str(ck), stop_after=2)
    assert len(part.cells) == 2
    # simulate a kill in the middle of a write
    with open(ck, "a") as fh:
        fh.write('{"i": 2, "j": 0, "expo')
    resumed = run_sweep(g, SHORT, checkpoint=str(ck))
    assert sweep_csv_text(resumed) == full
    recs = [json.loads(line) for line in ck.read_text().splitlines()[:2]]
    assert all(r["status"] == "done" for r in recs)


def test_checkpoint_ignores_other_parameters(tmp_path):
    ck = tmp_path / "ck.jsonl"
    run_sweep(small_grid(), SHORT, checkpoint=str(ck))
    other = SweepGrid("gamma", (0.05, 0.09), 3, "beta", (0.0015, 0.16), 2, fixed={"mu": 0.03})
    res = run_sweep(other, SHORT, checkpoint=str(ck))
    assert all(r["params"]["mu"] == 0.03 for r in res.cells)


def test_sweep_is_deterministic():
    g = small_grid()
    assert sweep_csv_text(run_sweep(g, SHORT)) == sweep_csv_text(run_sweep(g, SHORT))


def test_heatmap_bytes(tmp_path):
    data = pgm_bytes(np.zeros((2, 3)))
    assert data == b"P5\n3 2\n255\n" + bytes([128] * 6)
    assert pgm_bytes([[0.1, -0.1]])[-2:] == bytes([255, 0])
    assert pgm_bytes([[0.01]])[-1] == 148
    v = np.array([[0.0, 0.01], [-0.02, 0.05]])
    write_heatmap(v, tmp_path / "h.pgm")
    np.testing.assert_array_equal(read_pgm(tmp_path / "h.pgm"), [[128, 148], [88, 228]])
    with pytest.raises(ValueError):
        pgm_bytes([[np.nan]])
