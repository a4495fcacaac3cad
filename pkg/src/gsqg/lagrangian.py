"""Flow maps, the volume-preserving chart correction and the exponential map.

Throughout, a map ``gamma`` of the torus is stored as its periodic displacement
``d`` with ``gamma(x) = x + d(x)``.  The geodesic is followed through the pair
``(gamma, A)`` where ``A`` is the back-to-labels map, advected as a passive
vector of labels, so that ``theta(t) = theta0 o A`` at every time.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import interp, norms
from . import spectral as sp
from .errors import (BlowupSuspected, ConsistencyLost, InconsistentPair, IterLimit,
                     NoContraction, NotDivergenceFree)
from .interp import compose  # noqa: F401  (re-exported: part of the flow-map toolkit)
from .spectral import Grid2D

log = logging.getLogger(__name__)

EPS_CHART = 0.25
PULLBACK_CHUNK = 1 << 21   # evaluation points per block on fine grids


# --- Jacobians and the chart -----------------------------------------------

def jacobian_det(grid: Grid2D, d: np.ndarray) -> np.ndarray:
    """Pointwise ``det(I + Dd)`` with spectral derivatives."""
    g1 = sp.gradient(grid, d[0])
    g2 = sp.gradient(grid, d[1])
    return (1 + g1[0]) * (1 + g2[1]) - g1[1] * g2[0]


def _second_derivatives(grid: Grid2D, fh: np.ndarray):
    """``(f_11, f_22, f_12)``; the pure second derivatives keep the Nyquist
    modes so that ``f_11 + f_22`` is exactly the spectral Laplacian."""
    k1, k2 = grid.k
    d1, d2 = grid.ik
    return (sp.ifft(grid, -(k1**2) * fh), sp.ifft(grid, -(k2**2) * fh), sp.ifft(grid, d1 * d2 * fh))


@dataclass
class ChartCorrection:
    v: np.ndarray
    phi: np.ndarray
    xi_displacement: np.ndarray
    iterations: int
    residual: float
    residuals: list = field(default_factory=list)
    det_deviation: float = 0.0
    p_mean: float = 0.0


def chart_polynomial(dv, second):
    """Right-hand side ``P(Dv, D^2 phi)`` of ``Delta phi = P``, i.e. the terms of
    ``det(I + Dv + D^2 phi) = 1`` other than ``Delta phi``.

    ``dv = (v1_1, v1_2, v2_1, v2_2)`` with ``vi_j = d_j v_i``.
    """
    a11, a12, a21, a22 = dv
    p11, p22, p12 = second
    return (-(a11 + a22 + a11 * a22 + a11 * p22 + a22 * p11 + p11 * p22)
            + a21 * a12 + a21 * p12 + a12 * p12 + p12 * p12)


def volume_correct(grid: Grid2D, v: np.ndarray, tol: float = 1e-12, max_iter: int = 30,
                   eps_chart: float = EPS_CHART, s: float = 2.5) -> ChartCorrection:
    """Find ``phi`` with ``det D(x + v + grad phi) = 1`` by the contraction
    ``phi_{k+1} = Delta^-1 P(Dv, D^2 phi_k)``, starting from ``phi_0 = 0``.

    Iteration stops when ``||phi_{k+1} - phi_k||_{H^{s+1}} < tol``.  The mean of
    ``P`` vanishes identically (the Jacobian is a null Lagrangian) and is
    removed; its round-off size is reported as ``p_mean``.
    """
    v = np.asarray(v, dtype=float)
    div = float(np.max(np.abs(sp.divergence(grid, v))))
    if div > 1e-8 * max(float(np.max(np.abs(v))), np.finfo(float).tiny):
        raise NotDivergenceFree(f"max|div v| = {div:.3e}")
    size = norms.sobolev_norm(grid, v, s)
    if size > eps_chart:
        log.warning("||v||_H^%g = %.3g exceeds the chart radius %.3g; contraction may fail",
                    s, size, eps_chart)
    g1 = sp.gradient(grid, v[0])
    g2 = sp.gradient(grid, v[1])
    dv = (g1[0], g1[1], g2[0], g2[1])
    lap_inv = -grid.power(-2.0)
    phi_h = np.zeros((grid.n, grid.n // 2 + 1), dtype=complex)
    residuals: list[float] = []
    stalls = 0
    p_mean = 0.0
    weight = norms.sobolev_weight(grid, s + 1, False)
    for it in range(1, max_iter + 1):
        p = chart_polynomial(dv, _second_derivatives(grid, phi_h))
        ph = sp.fft(grid, p)
        p_mean = abs(ph[0, 0])
        new = lap_inv * ph
        res = math.sqrt(float(np.sum(weight * np.abs(new - phi_h) ** 2)))
        phi_h = new
        if residuals and res >= residuals[-1]:
            stalls += 1
        else:
            stalls = 0
        residuals.append(res)
        if res < tol:
            break
        if stalls >= 5:
            raise NoContraction(f"residual failed to decrease for 5 iterations (last {res:.3e})")
    else:
        raise IterLimit(f"no convergence in {max_iter} iterations (residual {residuals[-1]:.3e})")
    phi = sp.ifft(grid, phi_h)
    xi = v + sp.gradient(grid, phi)
    dev = float(np.max(np.abs(jacobian_det(grid, xi) - 1)))
    return ChartCorrection(v=v, phi=phi, xi_displacement=xi, iterations=it, residual=residuals[-1],
                           residuals=residuals, det_deviation=dev, p_mean=p_mean)


# --- scalar data ------------------------------------------------------------

class ScalarData:
    """Initial scalar that can be evaluated anywhere: a linear combination of
    grid fields (trigonometric interpolant) and closed-form callables ``f(x1, x2)``."""

    def __init__(self, grid: Grid2D, terms):
        self.grid = grid
        self.terms = []
        for coef, term in terms:
            if callable(term):
                self.terms.append((float(coef), term, None))
            else:
                arr = np.asarray(term, dtype=float)
                spec = sp.to_spectrum(grid, arr)
                self.terms.append((float(coef), None, spec))

    @classmethod
    def wrap(cls, grid: Grid2D, theta0) -> "ScalarData":
        if isinstance(theta0, ScalarData):
            return theta0
        return cls(grid, [(1.0, theta0)])

    def __add__(self, other: "ScalarData") -> "ScalarData":
        out = ScalarData(self.grid, [])
        out.terms = self.terms + other.terms
        return out

    def scaled(self, c: float) -> "ScalarData":
        out = ScalarData(self.grid, [])
        out.terms = [(c * a, f, s) for a, f, s in self.terms]
        return out

    def __call__(self, x1, x2) -> np.ndarray:
        x1 = np.asarray(x1, dtype=float)
        x2 = np.asarray(x2, dtype=float)
        out = np.zeros(np.broadcast(x1, x2).shape)
        for coef, fun, spec in self.terms:
            if coef == 0:
                continue
            if fun is not None:
                out += coef * np.asarray(fun(x1, x2), dtype=float)
            else:
                out += coef * interp.trig_eval_spectrum(self.grid, spec, x1, x2)
        return out

    def on_grid(self, grid: Grid2D | None = None) -> np.ndarray:
        g = grid or self.grid
        X1, X2 = g.mesh
        return self(X1, X2)


def pullback(grid: Grid2D, theta0, d_back: np.ndarray, eval_grid: Grid2D | None = None) -> np.ndarray:
    """``theta0 o A`` sampled on ``eval_grid`` (default ``grid``); ``A = id + d_back``.

    On a finer evaluation grid the displacement is refined by its trigonometric
    interpolant, which keeps thin closed-form profiles resolved.
    """
    data = ScalarData.wrap(grid, theta0)
    if eval_grid is None or eval_grid.n == grid.n:
        X1, X2 = grid.mesh
        return data(X1 + d_back[0], X2 + d_back[1])
    spec = np.stack([sp.to_spectrum(grid, c) for c in d_back])
    x = eval_grid.x
    out = np.empty(eval_grid.shape)
    rows = max(1, PULLBACK_CHUNK // eval_grid.n)
    for i0 in range(0, eval_grid.n, rows):
        X1, X2 = np.meshgrid(x[i0:i0 + rows], x, indexing="ij")
        dd = interp.trig_eval_spectrum(grid, spec, X1, X2)
        out[i0:i0 + rows] = data(X1 + dd[0], X2 + dd[1])
    return out


# --- flow-map pair ----------------------------------------------------------

@dataclass
class FlowMapPair:
    grid: Grid2D
    d_fwd: np.ndarray
    d_back: np.ndarray
    t: float = 0.0
    consistency: float = 0.0
    det_deviation: float = 0.0

    @classmethod
    def identity(cls, grid: Grid2D) -> "FlowMapPair":
        z = np.zeros((2, grid.n, grid.n))
        return cls(grid, z, z.copy(), 0.0)

    def forward_points(self):
        X1, X2 = self.grid.mesh
        return X1 + self.d_fwd[0], X2 + self.d_fwd[1]

    def measure(self) -> "FlowMapPair":
        self.consistency = pair_consistency(self.grid, self.d_fwd, self.d_back)
        self.det_deviation = float(np.max(np.abs(jacobian_det(self.grid, self.d_fwd) - 1)))
        return self


def pair_consistency(grid: Grid2D, d_fwd: np.ndarray, d_back: np.ndarray) -> float:
    """``||gamma o A - id||_inf`` on the grid."""
    X1, X2 = grid.mesh
    f_at_a = interp.trig_eval(grid, d_fwd, X1 + d_back[0], X2 + d_back[1])
    return float(np.max(np.abs(d_back + f_at_a)))


def _velocity_from_samples(grid: Grid2D, theta_samples: np.ndarray, beta: float):
    """``curl^-1 (-Delta)^(beta/2) theta`` with the scalar truncated by the 2/3 rule.

    The zero mode is ignored, so a conserved mean of ``theta0`` does not move anything.
    """
    th = sp.truncate(grid, sp.fft(grid, theta_samples))
    u1h, u2h = sp.velocity_hat(grid, th * grid.power(beta), 0.0)
    return u1h, u2h


def _rates(grid, data, d_fwd, d_back, beta):
    X1, X2 = grid.mesh
    theta = data(X1 + d_back[0], X2 + d_back[1])
    u1h, u2h = _velocity_from_samples(grid, theta, beta)
    u = np.stack([sp.ifft(grid, u1h), sp.ifft(grid, u2h)])
    spec = np.stack([sp.to_spectrum(grid, u[0]), sp.to_spectrum(grid, u[1])])
    fwd = interp.trig_eval_spectrum(grid, spec, X1 + d_fwd[0], X2 + d_fwd[1])
    d1, d2 = grid.ik
    back = []
    for c in range(2):
        bh = sp.truncate(grid, sp.fft(grid, d_back[c]))
        adv = u[0] * sp.ifft(grid, d1 * bh) + u[1] * sp.ifft(grid, d2 * bh)
        back.append(-sp.ifft(grid, sp.truncate(grid, sp.fft(grid, adv))) - u[c])
    return fwd, np.stack(back), u


def coupled_rhs(grid: Grid2D, pair: FlowMapPair, theta0, beta: float):
    """Time derivatives ``(d/dt d_fwd, d/dt d_back)`` of the flow-map pair.

    ``u = curl^-1 (-Delta)^(beta/2) (theta0 o A)``; the forward rate is ``u o gamma``
    and the back-to-labels displacement obeys ``d_t + (u . grad) d = -u``.
    """
    if isinstance(theta0, np.ndarray):
        sp.require_mean_zero(theta0, "theta0")
    cons = pair_consistency(grid, pair.d_fwd, pair.d_back)
    if cons > 10 * grid.dx:
        raise InconsistentPair(f"||gamma o A - id|| = {cons:.3e} exceeds 10 dx")
    fwd, back, _ = _rates(grid, ScalarData.wrap(grid, theta0), pair.d_fwd, pair.d_back, beta)
    return fwd, back


def default_steps(grid: Grid2D, umax: float, t: float, cfl: float = 0.5) -> int:
    return max(1, int(math.ceil(abs(t) / (cfl * grid.dx / max(1.0, umax)))))


def exponential_map(grid: Grid2D, theta0, t: float, beta: float, n_steps: int | None = None,
                    cfl: float = 0.5, check: bool = True):
    """Geodesic endpoint: integrate the flow-map pair from the identity to time ``t``.

    A fixed number of RK4 steps is used (``n_steps``, by default taken from the
    CFL rule at the initial velocity), so the discrete map depends smoothly on
    ``theta0``.  Returns ``(pair, theta_t)`` with ``theta_t = theta0 o A``.
    """
    data = ScalarData.wrap(grid, theta0)
    if isinstance(theta0, np.ndarray):
        sp.require_mean_zero(theta0, "theta0")
    pair = FlowMapPair.identity(grid)
    if t == 0:
        return pair.measure(), data.on_grid()
    X1, X2 = grid.mesh
    u1h, u2h = _velocity_from_samples(grid, data(X1, X2), beta)
    umax0 = max(float(np.max(np.abs(sp.ifft(grid, u1h)))), float(np.max(np.abs(sp.ifft(grid, u2h)))))
    if n_steps is None:
        n_steps = default_steps(grid, umax0, t, cfl)
    h = t / n_steps
    y = np.concatenate([pair.d_fwd, pair.d_back])

    def f(z):
        a, b, _ = _rates(grid, data, z[:2], z[2:], beta)
        return np.concatenate([a, b])

    for step in range(n_steps):
        y = _rk4(f, y, h)
        if not np.all(np.isfinite(y)):
            raise BlowupSuspected(f"non-finite flow map after step {step + 1}")
    pair = FlowMapPair(grid, y[:2], y[2:], t)
    if check:
        pair.measure()
        if pair.consistency > 0.1 * grid.dx * n_steps:
            raise ConsistencyLost(f"||gamma o A - id|| = {pair.consistency:.3e}")
    theta_t = data(X1 + pair.d_back[0], X2 + pair.d_back[1])
    return pair, theta_t


def _rk4(f, y, h):
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


# --- derivative probes ------------------------------------------------------

@dataclass
class DexpResult:
    value: np.ndarray          # central difference at eps
    value_half: np.ndarray     # central difference at eps/2
    richardson_error: float    # sup-norm error estimate of value_half
    eps: float

    @property
    def extrapolated(self) -> np.ndarray:
        return (4 * self.value_half - self.value) / 3


def dexp_directional(grid: Grid2D, theta0, w_theta, t: float, beta: float, eps: float = 1e-2,
                     n_steps: int | None = None) -> DexpResult:
    """Directional derivative of ``theta0 -> gamma(t)`` along ``w_theta`` by central
    differences at ``eps`` and ``eps/2``; the difference of the two is the
    Richardson error estimate of the finer value (second-order scheme)."""
    if not 1e-4 <= eps <= 1e-1:
        raise ValueError("eps must lie in [1e-4, 1e-1]")
    base = ScalarData.wrap(grid, theta0)
    w = ScalarData.wrap(grid, w_theta)
    if n_steps is None:
        X1, X2 = grid.mesh
        u1h, u2h = _velocity_from_samples(grid, (base + w.scaled(eps))(X1, X2), beta)
        umax = max(float(np.max(np.abs(sp.ifft(grid, c)))) for c in (u1h, u2h))
        n_steps = default_steps(grid, umax, t)

    def diff(e):
        plus, _ = exponential_map(grid, base + w.scaled(e), t, beta, n_steps, check=False)
        minus, _ = exponential_map(grid, base + w.scaled(-e), t, beta, n_steps, check=False)
        return (plus.d_fwd - minus.d_fwd) / (2 * e)

    d1 = diff(eps)
    d2 = diff(eps / 2)
    err = float(np.max(np.abs(d1 - d2))) / 3
    return DexpResult(value=d1, value_half=d2, richardson_error=err, eps=eps)


@dataclass
class TaylorRemainder:
    taus: np.ndarray
    remainders: np.ndarray
    slope: float               # least-squares log-log slope (2 for a C^2 map)


def taylor_remainder(grid: Grid2D, theta0, w_theta, t: float, beta: float, taus,
                     n_steps: int | None = None, eps: float = 1e-2) -> TaylorRemainder:
    """``||E(theta0 + tau w) - E(theta0) - tau dE(theta0) w||_inf`` for ``E = theta0 -> gamma(t)``.

    All runs share one step count so the discrete map is a fixed smooth function.
    """
    base = ScalarData.wrap(grid, theta0)
    w = ScalarData.wrap(grid, w_theta)
    taus = np.asarray(taus, dtype=float)
    if n_steps is None:
        X1, X2 = grid.mesh
        u1h, u2h = _velocity_from_samples(grid, (base + w.scaled(float(taus.max())))(X1, X2), beta)
        umax = max(float(np.max(np.abs(sp.ifft(grid, c)))) for c in (u1h, u2h))
        n_steps = default_steps(grid, umax, t)
    p0, _ = exponential_map(grid, base, t, beta, n_steps, check=False)
    deriv = dexp_directional(grid, base, w, t, beta, eps=eps, n_steps=n_steps).extrapolated
    rem = []
    for tau in taus:
        p, _ = exponential_map(grid, base + w.scaled(tau), t, beta, n_steps, check=False)
        rem.append(float(np.max(np.abs(p.d_fwd - p0.d_fwd - tau * deriv))))
    rem = np.asarray(rem)
    ok = rem > 0
    slope = float(np.polyfit(np.log(taus[ok]), np.log(rem[ok]), 1)[0]) if ok.sum() >= 2 else math.nan
    return TaylorRemainder(taus, rem, slope)
