"""Acceptance criteria 1-10, each checked at its stated tolerance.

Every test records ``(criterion, ok, detail)`` through the ``criterion`` fixture
before asserting, and the terminal summary prints one PASS/FAIL line per
criterion.  Two clauses cannot hold for the implemented scheme and are marked
strict xfail, so their failure is both visible in the summary and enforced.
"""
import functools
import math

import numpy as np
import pytest

from gsqg import eulerian as eu, lagrangian as lg, norms, spectral as sp
from gsqg.experiments import (HolderConfig, NonuniformConfig, run_holder_boost,
                              run_inequality_sweep, run_nonuniform)
from gsqg.profiles import taylor_green
from gsqg.spectral import Grid2D

BETAS = (0.0, 0.5, 1.0)
S = 2.5


def relmax(a, b):
    return float(np.max(np.abs(a - b))) / max(float(np.max(np.abs(b))), 1e-300)


def smooth_theta(grid):
    """Analytic (not band-limited) mean-zero data."""
    X1, X2 = grid.mesh
    f = 1 / (2.0 + np.cos(X1) * np.cos(X2) + 0.5 * np.sin(X1 + 2 * X2))
    return f - f.mean()


def random_data(grid, seed=2024):
    return sp.random_field(grid, np.random.default_rng(seed), kmax=4, amplitude=0.3)


# --- 1. operator exactness --------------------------------------------------

MODES = ((1, 0), (0, 3), (2, -5), (7, 11), (40, -17))
# orders used by the solver: the velocity law (-1 + beta/2), its inverse
# ((1 - beta)/2) and the Laplacian; above sigma = 1 the round-off of the top
# modes times (kmax/|k|)^(2 sigma) exceeds 1e-12 on the lowest modes
SIGMAS = (-1.0, -0.75, -0.5, 0.25, 0.5, 1.0)


def test_c01_operator_exactness(criterion):
    g = Grid2D(128)
    X1, X2 = g.mesh
    worst = 0.0
    for k1, k2 in MODES:
        ph = k1 * X1 + k2 * X2
        c, s = np.cos(ph), np.sin(ph)
        kk = math.hypot(k1, k2)
        for sigma in SIGMAS:
            worst = max(worst, relmax(sp.fractional_laplacian(g, c, sigma), kk ** (2 * sigma) * c))
        worst = max(worst, relmax(sp.riesz_transform(g, c, 1), -k1 / kk * s) if k1 else 0.0)
        worst = max(worst, relmax(sp.riesz_transform(g, c, 2), -k2 / kk * s) if k2 else 0.0)
        for beta in BETAS:
            m = kk ** (beta - 2)
            u = sp.velocity_from_theta(g, c, beta)
            worst = max(worst, relmax(u, np.stack([-k2 * m * s, k1 * m * s])))
        worst = max(worst, relmax(sp.gradient(g, s), np.stack([k1 * c, k2 * c])))
        worst = max(worst, relmax(sp.perp_gradient(g, s), np.stack([-k2 * c, k1 * c])))
        v = np.stack([s, 2 * c])
        worst = max(worst, relmax(sp.divergence(g, v), k1 * c - 2 * k2 * s))
        worst = max(worst, relmax(sp.curl(g, v), -2 * k1 * s - k2 * c))
        worst = max(worst, relmax(sp.curl_inverse(g, c), np.stack([-k2 / kk**2 * s, k1 / kk**2 * s])))
    f = sp.random_field(g, np.random.default_rng(5))
    rr = sum(sp.riesz_transform(g, sp.riesz_transform(g, f, j), j) for j in (1, 2))
    riesz = relmax(rr, -f)
    trip = max(relmax(sp.theta_from_velocity(g, sp.velocity_from_theta(g, f, b), b), f) for b in BETAS)
    ok = worst <= 1e-12 and riesz <= 1e-12 and trip <= 1e-12
    criterion(1, ok, f"modes {worst:.1e}, R1^2+R2^2+id {riesz:.1e}, roundtrip {trip:.1e} (tol 1e-12)")
    assert ok


# --- 2. stationarity --------------------------------------------------------

@pytest.mark.parametrize("beta", BETAS)
def test_c02_stationarity(criterion, beta):
    g = Grid2D(128)
    th0 = taylor_green(g)
    th1 = eu.integrate(eu.SimState(g, 0.0, beta, theta=th0), 1.0).final().theta
    err = norms.sobolev_norm(g, th1 - th0, S)
    criterion(2, err <= 1e-8, f"beta={beta:g}: {err:.1e}")
    assert err <= 1e-8


# --- 3. conservation --------------------------------------------------------

@pytest.mark.parametrize("beta", BETAS)
def test_c03_conservation(criterion, beta):
    g = Grid2D(256)
    th0 = random_data(g)
    tr = eu.integrate(eu.SimState(g, 0.0, beta, theta=th0), 1.0)
    l2, ham = tr.series("l2"), tr.series("hamiltonian")
    drift = max(np.max(np.abs(l2 / l2[0] - 1)), np.max(np.abs(ham / ham[0] - 1)))
    tv = eu.integrate(eu.SimState(g, 0.0, beta, theta=th0, formulation=eu.VELOCITY), 1.0)
    phi = float(tv.series("phi_l2").max())
    ok = drift <= 1e-6 and phi <= 1e-8
    criterion(3, ok, f"beta={beta:g}: drift {drift:.1e}, Phi {phi:.1e}")
    assert ok


# --- 4. formulation equivalence ---------------------------------------------

@functools.lru_cache(maxsize=None)
def equivalence_error(n: int, beta: float) -> float:
    g = Grid2D(n)
    th0 = smooth_theta(g)
    a = eu.integrate(eu.SimState(g, 0.0, beta, theta=th0), 1.0).final().theta
    b = eu.integrate(eu.SimState(g, 0.0, beta, theta=th0, formulation=eu.VELOCITY), 1.0).final().scalar
    return norms.sobolev_norm(g, a - b, S - 1) / norms.sobolev_norm(g, a, S - 1)


@pytest.mark.parametrize("beta", BETAS)
def test_c04_formulation_equivalence(criterion, beta):
    err = equivalence_error(256, beta)
    criterion(4, err <= 1e-4, f"beta={beta:g}: rel H^1.5 {err:.1e} at n=256")
    assert err <= 1e-4


@pytest.mark.xfail(strict=True, reason="the discrete velocity and transport right-hand sides "
                   "coincide algebraically, so the difference is round-off at every resolution")
@pytest.mark.parametrize("beta", BETAS)
def test_c04_equivalence_improves_under_refinement(criterion, beta):
    errs = [equivalence_error(n, beta) for n in (64, 128, 256)]
    gains = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(q >= 4 for q in gains)
    criterion(4, ok, f"beta={beta:g}: refinement gains {', '.join(f'{q:.2f}' for q in gains)} "
                     f"(need >= 4; errors {errs[0]:.1e}..{errs[-1]:.1e})")
    assert ok


# --- 5. Lagrangian vs Eulerian ----------------------------------------------

@pytest.mark.parametrize("beta", BETAS)
def test_c05_lagrangian_eulerian(criterion, beta):
    g = Grid2D(256)
    th0 = random_data(g)
    pair, th_l = lg.exponential_map(g, th0, 0.5, beta)
    th_e = eu.integrate(eu.SimState(g, 0.0, beta, theta=th0), 0.5).final().theta
    d = th_l - th_e
    err = norms.sobolev_norm(g, d - d.mean(), S - 1)
    ok = err <= 1e-3 and pair.det_deviation <= 1e-5
    criterion(5, ok, f"beta={beta:g}: H^1.5 {err:.1e}, det {pair.det_deviation:.1e}")
    assert ok


# --- 6. chart contraction ---------------------------------------------------

def test_c06_chart(criterion):
    g = Grid2D(64)
    X1, X2 = g.mesh
    rng = np.random.default_rng(11)
    worst_it, worst_det = 0, 0.0
    for trial in range(4):
        v = sp.perp_gradient(g, sp.random_field(g, rng, kmax=3))
        v *= 0.25 / norms.sobolev_norm(g, v, S)
        c = lg.volume_correct(g, v)
        worst_it, worst_det = max(worst_it, c.iterations), max(worst_det, c.det_deviation)
    tg = lambda e: e * sp.perp_gradient(g, np.sin(X1) * np.sin(X2))
    v = tg(1.0)
    c = lg.volume_correct(g, v * 0.25 / norms.sobolev_norm(g, v, S))
    worst_it, worst_det = max(worst_it, c.iterations), max(worst_det, c.det_deviation)
    # even part of phi(eps) against the leading corrector; the odd part is O(eps^3)
    leading = lambda e: -e**2 * (np.cos(2 * X1) + np.cos(2 * X2)) / 8
    epss = np.array([0.08, 0.04, 0.02])
    errs = []
    for e in epss:
        even = 0.5 * (lg.volume_correct(g, tg(e)).phi + lg.volume_correct(g, tg(-e)).phi)
        errs.append(float(np.max(np.abs(even - leading(e)))))
    slopes = np.diff(np.log(errs)) / np.diff(np.log(epss))
    ok = worst_it <= 30 and worst_det <= 1e-10 and bool(np.all(slopes >= 3.8))
    criterion(6, ok, f"iterations {worst_it}, det {worst_det:.1e}, "
                     f"corrector orders {', '.join(f'{q:.2f}' for q in slopes)}")
    assert ok


# --- 7. smooth dependence ---------------------------------------------------

@pytest.mark.parametrize("beta", BETAS)
def test_c07_taylor_slope(criterion, beta):
    g = Grid2D(64)
    th0 = random_data(g, seed=3)
    w = sp.random_field(g, np.random.default_rng(7), kmax=4)
    w /= norms.sobolev_norm(g, w, S)
    taus = np.logspace(-3, -1, 5)
    tr = lg.taylor_remainder(g, th0, w, 1.0, beta, taus)
    ok = abs(tr.slope - 2.0) <= 0.2
    criterion(7, ok, f"beta={beta:g}: slope {tr.slope:.3f}")
    assert ok


def test_c07_dexp_at_zero(criterion):
    g = Grid2D(64)
    w = sp.random_field(g, np.random.default_rng(7), kmax=4)
    beta = 0.5
    uw = sp.velocity_from_theta(g, w, beta)
    scale = float(np.max(np.abs(uw)))
    errs = []
    for t in (0.1, 0.05):
        res = lg.dexp_directional(g, np.zeros(g.shape), w, t, beta)
        errs.append(float(np.max(np.abs(res.value - t * uw))))
    ok = all(e <= scale * t**2 for e, t in zip(errs, (0.1, 0.05)))
    criterion(7, ok, f"dexp(0) - t u_w: {errs[0]:.1e}, {errs[1]:.1e} (<= t^2 max|u_w|)")
    assert ok


# --- 8. non-uniform dependence ----------------------------------------------

@pytest.mark.parametrize("beta", BETAS)
def test_c08_nonuniform(criterion, beta):
    rep = run_nonuniform(NonuniformConfig(beta=beta))
    R = rep.config["R"]
    w_norm, kappa = rep.summary["w_norm"], rep.summary["kappa_star"]
    d0_ok = all(r["initial_distance"] <= 1.01 * w_norm / r["n"] for r in rep.records)
    wit_ok = all(r["witness"] >= kappa * w_norm / (4 * r["n"]) for r in rep.records)
    c_report = rep.summary["c_report"]
    ok = (d0_ok and wit_ok and c_report > 0 and c_report >= 0.05 * R
          and all(r["disjoint"] for r in rep.records) and rep.verdict)
    criterion(8, ok, f"beta={beta:g}: c_report {c_report:.2f} (>= {0.05 * R:g}), d0 ok {d0_ok}, "
                     f"witness ok {wit_ok}")
    assert ok


# --- 9. Hoelder boost -------------------------------------------------------

@pytest.fixture(scope="module")
def holder_report():
    return run_holder_boost(HolderConfig())


def test_c09_holder_boost(criterion, holder_report):
    rep = holder_report
    eps0 = rep.summary["eps0"]
    sups = [r["sup"] for r in rep.records]
    sems = [r["seminorm"] for r in rep.records]
    ok = (abs(eps0 - 1) <= 0.05 and rep.summary["sup_decreasing"] and sups[-1] < 0.1 * sups[0]
          and all(q >= 0.9 * eps0 for q in sems) and rep.verdict)
    criterion(9, ok, f"eps0 {eps0:.4f}, sup {sups[0]:.2e} -> {sups[-1]:.2e}, min seminorm {min(sems):.3f}")
    assert ok


@pytest.mark.xfail(strict=True, reason="sup |theta_n - theta| >= eps0 (h T)^alpha, so its ratio "
                   "to h T grows like (h T)^(alpha - 1)")
def test_c09_sup_ratio_bounded(criterion, holder_report):
    ratios = [r["sup_over_ell"] for r in holder_report.records]
    ok = max(ratios) <= 1.1 * ratios[0]
    criterion(9, ok, f"sup/(hT) {ratios[0]:.1f} -> {ratios[-1]:.1f} (not bounded)")
    assert ok


# --- 10. Sobolev inequalities ---------------------------------------------

def test_c10_inequalities(criterion):
    rep = run_inequality_sweep()
    dis = [r for r in rep.records if r["kind"] == "disjoint"]
    c_s = {}
    for s in (-1.0, 0.5, 2.5):
        vals = [r["value"] for r in dis if r["s"] == s and 0.05 <= r["r"] <= 0.5]
        c_s[s] = min(vals)
    s0 = [r["value"] for r in dis if r["s"] == 0.0]
    scal = [r["deviation"] for r in rep.records if r["kind"] == "scaling"
            and r["lambda"] in (2.0, 4.0) and r["d"] in (1, 2)]
    ok = (all(c > 0 and c >= rep.thresholds["c_min"] for c in c_s.values())
          and all(v == 1.0 for v in s0) and max(scal) <= 2e-2)
    criterion(10, ok, "c(s) " + ", ".join(f"{s:g}:{c:.3f}" for s, c in c_s.items())
              + f"; s=0 exact {all(v == 1.0 for v in s0)}; scaling dev {max(scal):.1e}")
    assert ok
