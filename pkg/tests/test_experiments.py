import dataclasses
import json
import math

import numpy as np
import pytest

from gsqg import spectral as sp
from gsqg.errors import DegenerateDirection, ValidationError
from gsqg.experiments import (DichotomyConfig, ExperimentReport, HolderConfig, InequalityConfig,
                              NonuniformConfig, calibrate_nonuniform, parallel_map, run_dichotomy,
                              run_holder_boost, run_inequality_sweep, run_nonuniform)
from gsqg.experiments import holder, nonuniform
from gsqg.spectral import Grid2D

SMALL = dict(grid_n=32, eval_n=1024, n_list=(2, 4))


@pytest.fixture(scope="module")
def small_report():
    return run_nonuniform(NonuniformConfig(**SMALL))


# --- report plumbing ----------------------------------------------------------

def test_report_json_is_sorted_and_timing_isolated(tmp_path):
    rep = ExperimentReport("x", {"b": 1, "a": np.float64(2.0)}, records=[{"n": 1, "v": np.int64(3)}],
                           verdict=True, timing={"seconds": 1.23})
    d = json.loads(rep.to_json())
    assert list(d) == sorted(d)
    assert "timing" in d and "timing" not in json.loads(rep.to_json(with_timing=False))
    assert rep.to_csv().splitlines() == ["n,v", "1,3"]
    rep.write(str(tmp_path))
    assert (tmp_path / "x.json").exists() and (tmp_path / "x.csv").exists()


def test_parallel_map_preserves_order():
    assert parallel_map(abs, [-3, 2, -1]) == [3, 2, 1]
    assert parallel_map(abs, [-3, 2, -1], workers=2) == [3, 2, 1]


# --- inequality sweep -------------------------------------------------------

@pytest.fixture(scope="module")
def ineq():
    return run_inequality_sweep(InequalityConfig(n=256, scaling_n={1: 4096, 2: 1024}))


def test_inequality_s0_row_is_one(ineq):
    vals = [r["value"] for r in ineq.records if r["kind"] == "disjoint" and r["s"] == 0.0]
    assert len(vals) == 6
    assert all(v == 1.0 for v in vals)


def test_inequality_constants_and_scaling(ineq):
    assert ineq.verdict
    assert ineq.summary["c_s"]["2.5"] >= 0.02
    assert ineq.thresholds == {"c_min": 0.02, "scaling_tol": 2e-2}
    half = [r for r in ineq.records if r["kind"] == "scaling" and r["lambda"] == 2.0 and r["s"] == r["d"] / 2]
    assert half and all(r["deviation"] <= 2e-2 for r in half)


def test_inequality_report_is_deterministic():
    cfg = InequalityConfig(n=128, radii=(0.2, 0.4), dims=(1,), scaling_n={1: 1024, 2: 256})
    assert run_inequality_sweep(cfg).to_json(False) == run_inequality_sweep(cfg).to_json(False)


# --- Hoelder boost ----------------------------------------------------------

def test_holder_eps0_radial_oracle():
    # |theta0(x0 + l)| / |l|^alpha = |l|^alpha / |l|^alpha inside the cutoff
    assert holder.measure_eps0(HolderConfig()) == pytest.approx(1.0, abs=1e-5)
    assert holder.measure_eps0(HolderConfig(alpha=0.3)) == pytest.approx(1.0, abs=1e-5)


def test_holder_data_invariants():
    cfg = HolderConfig()
    theta0 = holder.cusp_data(cfg)
    assert theta0(np.array([cfg.x0[0]]), np.array([cfg.x0[1]]))[0] == 0.0
    g = Grid2D(256)
    vals = theta0(*g.mesh)
    assert vals.min() >= 0.0
    with pytest.raises(ValidationError, match="alpha"):
        HolderConfig(alpha=1.5)


def test_holder_zero_boost_gives_zero_difference():
    f = holder.difference_shear(HolderConfig(), 0.0, 0.3)
    g = Grid2D(128)
    assert np.max(np.abs(f(*g.mesh))) == 0.0


def test_holder_run_shear():
    rep = run_holder_boost(HolderConfig(eval_n=512, n_random=2000))
    assert rep.verdict
    sups = [r["sup"] for r in rep.records]
    assert all(b < a for a, b in zip(sups, sups[1:]))
    for r in rep.records:
        # for l <= cutoff the witness quotient is exactly 2 l^alpha / l^alpha
        assert r["witness"] == pytest.approx(2.0, rel=1e-9)
        assert r["seminorm"] >= r["witness"]
        assert r["sup"] <= r["sup_bound"]


def test_holder_flow_mode():
    rep = run_holder_boost(HolderConfig(mode="flow", eval_n=256, n_random=1000,
                                        h_list=(0.25, 0.0625), T_list=(0.25, 0.0625)))
    assert rep.verdict
    assert all(0.5 < r["DA_sigma_min"] <= 1.0 <= r["DA_sigma_max"] < 2 for r in rep.records)


# --- non-uniform construction -------------------------------------------------

def test_nonuniform_config_validation():
    with pytest.raises(ValidationError, match="s"):
        NonuniformConfig(s=2.0)
    with pytest.raises(ValidationError, match="separation"):
        NonuniformConfig(separation=1.0)
    with pytest.raises(ValidationError, match="eval_n"):
        calibrate_nonuniform(NonuniformConfig(grid_n=32, eval_n=256, n_list=(2, 16)))


def test_nonuniform_base_bump_is_separated():
    cfg = NonuniformConfig(base_theta0="bump")
    assert nonuniform.base_separation(cfg) >= cfg.separation


def test_velocity_at_x_star_decays_with_distance():
    # free-space quadrature oracle: |S_beta theta*| decays as x* moves away along the axis
    g = Grid2D(128)
    raw = nonuniform.bump_function(g.length, (math.pi, 2.6), 2.0)(*g.mesh)
    for beta in (0.0, 0.5, 1.0):
        pv = [abs(sp.pv_kernel_eval(g, raw, (math.pi, x2), beta, 2)) for x2 in (4.8, 5.2, 5.6, 6.0)]
        assert all(b < a for a, b in zip(pv, pv[1:]))


def test_calibration_at_zero_base_is_velocity():
    cfg = calibrate_nonuniform(NonuniformConfig(**SMALL))
    c = cfg.calibration
    # d exp(0) w = T u_w
    assert np.allclose(c["dexp_at_x_star_unit"], np.array(c["u_star_at_x_star"]) * cfg.T, atol=1e-8)
    assert c["pv_sign_agrees"]
    assert cfg.kappa_star == pytest.approx(cfg.target_displacement / cfg.w_norm)
    assert cfg.L_lip >= 1.0


@pytest.mark.parametrize("beta", [0.0, 1.0])
def test_kappa_positive_across_beta(beta):
    cfg = calibrate_nonuniform(NonuniformConfig(beta=beta, **SMALL))
    assert cfg.kappa_star > 0


def test_degenerate_direction(monkeypatch):
    monkeypatch.setattr(nonuniform, "DEGENERATE_TOL", 1e9)
    with pytest.raises(DegenerateDirection):
        calibrate_nonuniform(NonuniformConfig(**SMALL))


def test_nonuniform_run(small_report):
    rep = small_report
    assert rep.verdict
    w = rep.summary["w_norm"]
    for r in rep.records:
        assert r["d0_times_n"] == pytest.approx(w, rel=1e-12)
        assert r["witness"] >= r["witness_bound"]
        assert r["support_overlap_points"] == 0
    assert rep.summary["c_report"] >= rep.thresholds["c_report_threshold"]


def test_nonuniform_zero_direction_gives_zero_distances():
    cfg = dataclasses.replace(calibrate_nonuniform(NonuniformConfig(**SMALL)), w_scale=0.0)
    rep = run_nonuniform(cfg)
    for r in rep.records:
        assert r["initial_distance"] == 0.0
        assert r["solution_distance"] == 0.0


# --- dichotomy --------------------------------------------------------------

def test_dichotomy_slope_and_growth():
    rep = run_dichotomy(DichotomyConfig(betas=(0.0,), grid_n=32, nonuniform=NonuniformConfig(**SMALL)))
    assert rep.summary["lagrangian_slopes"]["beta=0"] == pytest.approx(2.0, abs=0.2)
    amp = [r["amplification"] for r in rep.records]
    assert amp[1] > amp[0]


def test_dichotomy_zero_family_and_beta_sweep():
    nu = NonuniformConfig(w_scale=0.0, **SMALL)
    rep = run_dichotomy(DichotomyConfig(grid_n=32, direction_scale=0.0, nonuniform=nu))
    assert sorted(rep.sections) == ["beta=0", "beta=0.5", "beta=1"]
    for sec in rep.sections.values():
        assert all(v == 0.0 for v in sec["lagrangian"]["remainders"])
    assert all(r["initial_distance"] == 0.0 and r["solution_distance"] == 0.0 for r in rep.records)


def _r_spread(rep, s):
    vals = [r["value"] for r in rep.records if r["kind"] == "disjoint" and r["s"] == s]
    return max(vals) / min(vals) - 1


@pytest.mark.parametrize("s", [0.5, 2.5])
def test_inequality_constant_independent_of_radius(ineq, s):
    assert _r_spread(ineq, s) <= 0.2


@pytest.mark.xfail(strict=True, reason="at s = -1 small bumps are dominated by their shared "
                   "low modes (the means), which pushes the ratio towards 2 as r shrinks")
def test_inequality_negative_s_radius_spread(ineq):
    assert _r_spread(ineq, -1.0) <= 0.2
