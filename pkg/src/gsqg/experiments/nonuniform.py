"""Non-uniform dependence of the Eulerian data-to-solution map.

Two families of initial data are built around a base scalar ``theta0``:

    theta1_n = theta0 + vartheta_n,        theta2_n = theta1_n + theta_star / n,

where ``vartheta_n`` is a thin bump of fixed ``H^s`` size ``R/2`` centred at a
point ``x*`` away from the support of ``theta0`` and ``theta_star`` is a wide
bump whose velocity at ``x*`` is non-zero.  The initial distance is
``||theta_star||/n -> 0``, but the two flows carry the thin bump to points about
``|dE(theta_star)(x*)|/n`` apart.  Once the bump radius ``r_n`` is below that
gap, the evolved bumps are disjoint and the solution distance stays of order
``R``.

The constants of the construction (``kappa*`` and the Lipschitz bound ``L``)
are measured in a calibration phase and recorded in the report.
"""
from __future__ import annotations

import dataclasses
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import interp, norms, profiles
from .. import spectral as sp
from ..errors import DegenerateDirection, ValidationError
from ..lagrangian import ScalarData, dexp_directional, exponential_map, pullback
from ..spectral import Grid2D
from .report import ExperimentReport, parallel_map

log = logging.getLogger(__name__)

MIN_SEPARATION = 2.0
DEGENERATE_TOL = 1e-8
D0_FACTOR = 1.01          # d0(n) <= D0_FACTOR * ||w*|| / n
WITNESS_FRACTION = 0.25   # witness >= WITNESS_FRACTION * kappa* ||w*|| / n
C_REPORT_FRACTION = 0.05  # min_n d_T(n) >= C_REPORT_FRACTION * R
RESOLVE_DX_FACTOR = 2.0   # thin bumps need r_n > RESOLVE_DX_FACTOR * dx on the eval grid


@dataclass
class NonuniformConfig:
    s: float = 2.5
    beta: float = 0.0
    R: float = 2.0
    n_list: tuple = (2, 4, 8, 16)
    T: float = 1.0
    base_theta0: str = "zero"              # "zero" or "bump"
    base_radius: float = 1.0
    base_amplitude: float = 0.5
    x_star: tuple = (math.pi, 5.0)
    separation: float = MIN_SEPARATION
    star_radius: float = 2.0              # radius of the wide bump theta*
    star_gap: float = 0.4                 # distance from supp theta* to x*
    target_displacement: float = 1.2      # |dE(w*)(x*)| after amplitude scaling
    w_scale: float = 1.0                  # multiplies w*/n in the second family
    grid_n: int = 128
    eval_n: int = 4096
    cfl: float = 0.5
    dexp_eps: float = 1e-2
    lip_radius: float = 0.25               # Lipschitz bound measured on B(x*, lip_radius)
    workers: int = 1
    # filled by calibrate_nonuniform
    kappa_star: float | None = None
    L_lip: float | None = None
    star_amplitude: float | None = None
    w_norm: float | None = None
    horizon: float | None = None
    calibration: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.s > 2:
            raise ValidationError("s", "must be > 2")
        if self.separation < MIN_SEPARATION:
            raise ValidationError("separation", f"must be >= {MIN_SEPARATION}")
        if self.base_theta0 not in ("zero", "bump"):
            raise ValidationError("base_theta0", "must be 'zero' or 'bump'")
        if not self.n_list or min(self.n_list) < 1:
            raise ValidationError("n_list", "must be positive integers")
        if self.R <= 0:
            raise ValidationError("R", "must be > 0")
        self.n_list = tuple(int(n) for n in self.n_list)
        self.x_star = tuple(float(c) for c in self.x_star)

    @property
    def sim_grid(self) -> Grid2D:
        return Grid2D(self.grid_n)

    @property
    def eval_grid(self) -> Grid2D:
        return Grid2D(self.eval_n)

    @property
    def t_final(self) -> float:
        return self.T if self.horizon is None else self.horizon

    def radius(self, n: int) -> float:
        """``r_n = kappa* ||w*|| / (8 L n)``."""
        return self.kappa_star * self.w_norm / (8 * self.L_lip * n)


# --- closed-form data -------------------------------------------------------

def bump_function(length: float, centre, radius: float, amplitude: float = 1.0, offset: float = 0.0):
    """Periodic closed-form bump ``amplitude * bump(|x - centre| / radius) - offset``."""
    c = (float(centre[0]), float(centre[1]))

    def f(x1, x2):
        d1 = (np.asarray(x1) - c[0] + length / 2) % length - length / 2
        d2 = (np.asarray(x2) - c[1] + length / 2) % length - length / 2
        return amplitude * profiles.bump(np.hypot(d1, d2) / radius) - offset

    return f


def _grid_mean(grid: Grid2D, f) -> float:
    X1, X2 = grid.mesh
    return float(np.mean(f(X1, X2)))


def mean_free_bump(grid: Grid2D, centre, radius: float, amplitude: float = 1.0):
    """Bump with its grid mean removed (the gSQG velocity law ignores the mean)."""
    raw = bump_function(grid.length, centre, radius, amplitude)
    return bump_function(grid.length, centre, radius, amplitude, offset=_grid_mean(grid, raw))


def star_centre(cfg: NonuniformConfig):
    return (cfg.x_star[0], cfg.x_star[1] - cfg.star_radius - cfg.star_gap)


def base_data(cfg: NonuniformConfig) -> ScalarData:
    g = cfg.sim_grid
    if cfg.base_theta0 == "zero":
        return ScalarData(g, [])
    centre = (cfg.x_star[0] + g.length / 2, cfg.x_star[1])
    return ScalarData(g, [(1.0, mean_free_bump(g, centre, cfg.base_radius, cfg.base_amplitude))])


def base_separation(cfg: NonuniformConfig) -> float:
    """Periodic distance from ``x*`` to the numerical support of the base scalar."""
    if cfg.base_theta0 == "zero":
        return math.inf
    g = cfg.eval_grid if cfg.eval_n <= 2048 else Grid2D(2048)
    centre = (cfg.x_star[0] + g.length / 2, cfg.x_star[1])
    raw = bump_function(g.length, centre, cfg.base_radius, cfg.base_amplitude)
    X1, X2 = g.mesh
    mask = norms.support_mask(raw(X1, X2))
    d1, d2 = profiles.periodic_offset(g, cfg.x_star, X1[mask], X2[mask])
    return float(np.min(np.hypot(d1, d2)))


def _point(x):
    return np.array([x[0]]), np.array([x[1]])


def _jacobian_norm(grid: Grid2D, d_fwd: np.ndarray) -> np.ndarray:
    """``||I + D d(x)||_2`` at every node (operator norm of the Jacobian of ``gamma``)."""
    g1 = sp.gradient(grid, d_fwd[0])
    g2 = sp.gradient(grid, d_fwd[1])
    jac = np.array([[1 + g1[0], g1[1]], [g2[0], 1 + g2[1]]]).transpose(2, 3, 0, 1)
    return np.linalg.norm(jac, ord=2, axis=(2, 3))


def _lipschitz(grid: Grid2D, d_fwd: np.ndarray, centre=None, radius: float | None = None) -> float:
    """Lipschitz bound of ``gamma``: sup of the Jacobian norm, globally or on ``B(centre, radius)``."""
    nrm = _jacobian_norm(grid, d_fwd)
    if centre is None:
        return float(np.max(nrm))
    d1, d2 = profiles.periodic_offset(grid, centre)
    return float(np.max(nrm[np.hypot(d1, d2) <= radius]))


# --- calibration ------------------------------------------------------------

def calibrate_nonuniform(cfg: NonuniformConfig) -> NonuniformConfig:
    """Measure ``kappa*``, ``L`` and the amplitude of ``theta*``; return a filled copy."""
    t0 = time.perf_counter()
    g = cfg.sim_grid
    sep = base_separation(cfg)
    if sep < cfg.separation:
        raise ValidationError("separation", f"base support is {sep:.3f} from x*, needs >= {cfg.separation}")
    base = base_data(cfg)
    unit = mean_free_bump(g, star_centre(cfg), cfg.star_radius)

    # non-vanishing velocity of the direction at x*: multiplier vs free-space kernel
    X1, X2 = g.mesh
    # velocity of the 2/3-truncated scalar, as seen by the Lagrangian solver
    u_star = sp.velocity_from_theta(g, sp.dealias_field(g, unit(X1, X2)), cfg.beta)
    u_at = interp.trig_eval(g, u_star, *_point(cfg.x_star)).ravel()
    raw = bump_function(g.length, star_centre(cfg), cfg.star_radius)(X1, X2)
    pv = np.array([sp.pv_kernel_eval(g, raw, cfg.x_star, cfg.beta, 2),
                   -sp.pv_kernel_eval(g, raw, cfg.x_star, cfg.beta, 1)])
    dom = int(np.argmax(np.abs(u_at)))
    sign_agrees = bool(np.sign(u_at[dom]) == np.sign(pv[dom]))

    # dE(theta0) in the direction theta*, evaluated at x*; scan earlier times if degenerate
    horizons = [cfg.T * (1 - j / 10) for j in range(6)]
    for t in horizons:
        res = dexp_directional(g, base, ScalarData(g, [(1.0, unit)]), t, cfg.beta, eps=cfg.dexp_eps)
        dE_at = interp.trig_eval(g, res.extrapolated, *_point(cfg.x_star)).ravel()
        m1 = float(np.hypot(*dE_at))
        if m1 >= DEGENERATE_TOL:
            break
        log.warning("degenerate direction at t=%.3f (|dE w*(x*)| = %.2e)", t, m1)
    else:
        raise DegenerateDirection(f"|dE(w*)(x*)| < {DEGENERATE_TOL} at all scanned times")

    amp = cfg.target_displacement / m1
    star = mean_free_bump(g, star_centre(cfg), cfg.star_radius, amp)
    ge = cfg.eval_grid
    w_norm = norms.sobolev_norm(ge, star(*ge.mesh), cfg.s)
    kappa = cfg.target_displacement / w_norm

    # Lipschitz constant of the forward maps over pilot runs (base and base + w*/n).
    # Only the image of the thin-bump support B(x*, r_n) matters, so the sup of
    # |D gamma| is taken over the ball B(x*, lip_radius) containing every B(x*, r_n).
    lips, lips_global = [], []
    for n in (None,) + cfg.n_list:
        data = base if n is None else base + ScalarData(g, [(cfg.w_scale / n, star)])
        if not data.terms:
            lips.append(1.0)
            lips_global.append(1.0)
            continue
        pair, _ = exponential_map(g, data, t, cfg.beta, cfl=cfg.cfl)
        lips.append(_lipschitz(g, pair.d_fwd, cfg.x_star, cfg.lip_radius))
        lips_global.append(_lipschitz(g, pair.d_fwd))
    L = max(1.0, max(lips))

    out = dataclasses.replace(cfg, kappa_star=kappa, L_lip=L, star_amplitude=amp, w_norm=w_norm,
                              horizon=t)
    out.calibration = {
        "base_separation": sep,
        "u_star_at_x_star": u_at.tolist(),
        "pv_kernel_at_x_star": pv.tolist(),
        "pv_sign_agrees": sign_agrees,
        "dexp_at_x_star_unit": dE_at.tolist(),
        "dexp_richardson_error": res.richardson_error,
        "pilot_lipschitz": lips,
        "pilot_lipschitz_global": lips_global,
        "seconds": time.perf_counter() - t0,
    }
    dx_e = ge.dx
    if out.radius(min(cfg.n_list)) > cfg.lip_radius:
        raise ValidationError("lip_radius", "must contain every thin-bump support B(x*, r_n)")
    for n in cfg.n_list:
        if not out.radius(n) > RESOLVE_DX_FACTOR * dx_e:
            raise ValidationError("eval_n", f"r_n = {out.radius(n):.3e} at n={n} is not > "
                                  f"{RESOLVE_DX_FACTOR:g} dx = {RESOLVE_DX_FACTOR * dx_e:.3e}")
    return out


# --- the run ----------------------------------------------------------------

def thin_bump(cfg: NonuniformConfig, n: int):
    """``vartheta_n``: bump of radius ``r_n`` at ``x*`` with ``||.||_{H^s} = R/2``."""
    ge = cfg.eval_grid
    r = cfg.radius(n)
    unit = mean_free_bump(ge, cfg.x_star, r)
    scale = (cfg.R / 2) / norms.sobolev_norm(ge, unit(*ge.mesh), cfg.s)
    return mean_free_bump(ge, cfg.x_star, r, scale)


def _run_index(args):
    cfg, n = args
    t0 = time.perf_counter()
    g, ge = cfg.sim_grid, cfg.eval_grid
    base = base_data(cfg)
    vartheta = thin_bump(cfg, n)
    star = mean_free_bump(g, star_centre(cfg), cfg.star_radius, cfg.star_amplitude)
    pert = ScalarData(g, [(cfg.w_scale / n, star)])
    data1 = base + ScalarData(g, [(1.0, vartheta)])
    data2 = data1 + pert
    t = cfg.t_final
    pair1, _ = exponential_map(g, data1, t, cfg.beta, cfl=cfg.cfl)
    pair2, _ = exponential_map(g, data2, t, cfg.beta, cfl=cfg.cfl)

    d0 = norms.sobolev_norm(ge, pert.on_grid(ge), cfg.s)
    diff = pullback(g, data1, pair1.d_back, ge)
    diff -= pullback(g, data2, pair2.d_back, ge)
    dT = norms.sobolev_norm(ge, diff, cfg.s)
    del diff

    b1 = pullback(g, ScalarData(g, [(1.0, vartheta)]), pair1.d_back, ge)
    b2 = pullback(g, ScalarData(g, [(1.0, vartheta)]), pair2.d_back, ge)
    # the bump offset (mean) is a constant; the support is where the bump itself lives
    off = -vartheta(np.array(cfg.x_star[0] + ge.length / 2), np.array(cfg.x_star[1] + ge.length / 2))
    m1 = norms.support_mask(b1 + off)
    m2 = norms.support_mask(b2 + off)
    overlap = int(np.count_nonzero(m1 & m2))
    bump_dT = norms.sobolev_norm(ge, b1 - b2, cfg.s)
    del b1, b2

    p = _point(cfg.x_star)
    g1 = interp.trig_eval(g, pair1.d_fwd, *p).ravel()
    g2 = interp.trig_eval(g, pair2.d_fwd, *p).ravel()
    witness = float(np.hypot(*(g1 - g2)))
    witness_bound = WITNESS_FRACTION * cfg.kappa_star * cfg.w_norm / n
    d0_bound = D0_FACTOR * abs(cfg.w_scale) * cfg.w_norm / n
    rec = {
        "n": n,
        "r_n": cfg.radius(n),
        "initial_distance": d0,
        "d0_times_n": d0 * n,
        "d0_bound": d0_bound,
        "solution_distance": dT,
        "bump_solution_distance": bump_dT,
        "witness": witness,
        "witness_bound": witness_bound,
        "support_overlap_points": overlap,
        "in_ball": bool(cfg.R / 2 + d0 <= cfg.R),
        "consistency": max(pair1.consistency, pair2.consistency),
        "det_deviation": max(pair1.det_deviation, pair2.det_deviation),
        "seconds": time.perf_counter() - t0,
    }
    rec["d0_ok"] = bool(d0 <= d0_bound)
    rec["witness_ok"] = bool(witness >= witness_bound)
    rec["disjoint"] = overlap == 0
    return rec


def run_nonuniform(cfg: NonuniformConfig) -> ExperimentReport:
    t0 = time.perf_counter()
    if cfg.kappa_star is None or cfg.L_lip is None:
        cfg = calibrate_nonuniform(cfg)
    recs = parallel_map(_run_index, [(cfg, n) for n in cfg.n_list], cfg.workers)
    timing = {"calibration_seconds": cfg.calibration.get("seconds", 0.0),
              "per_n_seconds": [r.pop("seconds") for r in recs]}
    c_report = min(r["solution_distance"] for r in recs)
    c_threshold = C_REPORT_FRACTION * cfg.R
    for r in recs:
        r["pass"] = bool(r["d0_ok"] and r["witness_ok"] and r["disjoint"])
    config = dataclasses.asdict(cfg)
    calib = config.pop("calibration")
    calib.pop("seconds", None)
    verdict = all(r["pass"] for r in recs) and c_report >= c_threshold
    timing["total_seconds"] = time.perf_counter() - t0
    return ExperimentReport(
        name="nonuniform",
        config=config,
        records=recs,
        thresholds={"d0_factor": D0_FACTOR, "witness_fraction": WITNESS_FRACTION,
                    "c_report_fraction": C_REPORT_FRACTION, "c_report_threshold": c_threshold,
                    "degenerate_tol": DEGENERATE_TOL, "resolvability_dx_factor": RESOLVE_DX_FACTOR,
                    "lip_radius": cfg.lip_radius},
        summary={"c_report": c_report, "kappa_star": cfg.kappa_star, "L_lip": cfg.L_lip,
                 "w_norm": cfg.w_norm, "horizon": cfg.t_final, "calibration": calib},
        verdict=verdict,
        seeds={},
        timing=timing,
    )
