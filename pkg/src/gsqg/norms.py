"""Fractional Sobolev and Hoelder norms, the beta-metric, and the support inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import spectral as sp
from .errors import NonDyadic, NotDivergenceFree, OverlappingSupports
from .spectral import Grid2D


@dataclass
class NormSpec:
    s: float = 2.5
    homogeneous: bool = False
    alpha: float = 0.5

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")


def sobolev_weight(grid: Grid2D, s: float, homogeneous: bool) -> np.ndarray:
    """Half-plane weights ``w(k)**s`` times the Hermitian multiplicity."""
    if homogeneous:
        w = grid.power(2 * s)
    else:
        w = (1.0 + grid.ksq) ** s
    return w * grid.hermitian_weight


def sobolev_norm(grid: Grid2D, f: np.ndarray, s: float, homogeneous: bool = False) -> float:
    """Discrete ``H^s`` (or ``Hdot^s``) norm ``sqrt(sum_k w(k)^s |f_hat(k)|^2)``.

    Vector fields of shape ``(2, n, n)`` are summed over components.  The
    homogeneous norm ignores the zero mode.
    """
    f = np.asarray(f)
    if f.ndim == 3:
        return math.sqrt(sum(sobolev_norm(grid, c, s, homogeneous) ** 2 for c in f))
    fh = sp.fft(grid, f)
    return math.sqrt(float(np.sum(sobolev_weight(grid, s, homogeneous) * np.abs(fh) ** 2)))


def _check_div_free(grid: Grid2D, v: np.ndarray, what: str) -> None:
    div = np.max(np.abs(sp.divergence(grid, v)))
    scale = np.max(np.abs(v))
    if div > 1e-8 * max(scale, np.finfo(float).tiny):
        raise NotDivergenceFree(f"{what}: max|div| = {div:.3e}")


def stream_function_hat(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    """Spectral stream function with ``v = grad_perp phi``: ``(i k2 v1 - i k1 v2) / |k|^2``."""
    d1, d2 = grid.ik
    return (d2 * sp.fft(grid, v[0]) - d1 * sp.fft(grid, v[1])) * grid.power(-2.0)


def beta_inner_product(grid: Grid2D, v: np.ndarray, w: np.ndarray, beta: float) -> float:
    """Right-invariant metric at the identity, ``int phi_v (-Delta)^((2-beta)/2) phi_w``."""
    _check_div_free(grid, v, "v")
    _check_div_free(grid, w, "w")
    pv = stream_function_hat(grid, v)
    pw = stream_function_hat(grid, w)
    val = grid.hermitian_weight * grid.power(2.0 - beta) * np.real(np.conj(pv) * pw)
    return float(np.sum(val))


def hamiltonian(grid: Grid2D, theta: np.ndarray, beta: float) -> float:
    """``(1/2) int theta (-Delta)^(-1+beta/2) theta``, the metric energy of the velocity."""
    sp.require_mean_zero(theta, "theta")
    th = sp.fft(grid, theta)
    return 0.5 * float(np.sum(grid.hermitian_weight * grid.power(beta - 2.0) * np.abs(th) ** 2))


# --- Hoelder ----------------------------------------------------------------

def periodic_delta(a: np.ndarray, b: np.ndarray, length: float) -> np.ndarray:
    d = np.asarray(a) - np.asarray(b)
    return (d + length / 2) % length - length / 2


@dataclass
class SamplingPlan:
    """Pairs over which the Hoelder quotient is maximised.

    Every pair of sample points within ``window`` of a focus point is used,
    plus ``n_random`` uniformly drawn pairs and the explicit ``pairs``.  Grid
    fields sample grid nodes (explicit pairs are snapped to the nearest node);
    callables are sampled on a lattice of the given ``spacing`` around each focus.
    """

    focus_points: Sequence = ()
    window: float = 0.5
    n_random: int = 100_000
    seed: int = 0
    pairs: Sequence = ()
    spacing: float | None = None
    extra_points: Sequence = field(default_factory=tuple)


def _max_quotient(pa, va, pb, vb, alpha, length, chunk=2_000_000):
    """Max of ``|va_i - vb_j| / |pa_i - pb_j|^alpha`` over all ``i, j``."""
    best = 0.0
    rows = max(1, chunk // max(len(pb), 1))
    for start in range(0, len(pa), rows):
        sl = slice(start, start + rows)
        dlt = periodic_delta(pa[sl, None, :], pb[None, :, :], length)
        dist = np.hypot(dlt[..., 0], dlt[..., 1])
        diff = np.abs(va[sl, None] - vb[None, :])
        ok = dist > 0
        if ok.any():
            best = max(best, float(np.max(diff[ok] / dist[ok] ** alpha)))
    return best


def _pair_quotient(p, q, vp, vq, alpha, length):
    dlt = periodic_delta(p, q, length)
    dist = np.hypot(dlt[:, 0], dlt[:, 1])
    ok = dist > 0
    if not ok.any():
        return 0.0
    return float(np.max(np.abs(vp - vq)[ok] / dist[ok] ** alpha))


def holder_seminorm(f, alpha: float, plan: SamplingPlan, grid: Grid2D) -> float:
    """Lower bound for ``sup |f(x)-f(y)| / |x-y|^alpha`` over the sampled pairs.

    ``f`` is either a grid field or a callable ``f(x1, x2)``; distances are periodic.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    rng = np.random.default_rng(plan.seed)
    L = grid.length
    best = 0.0
    if callable(f):
        def values(pts):
            return np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)

        h = plan.spacing or grid.dx
        m = int(np.floor(plan.window / h))
        off = np.arange(-m, m + 1) * h
        O1, O2 = np.meshgrid(off, off, indexing="ij")
        disk = np.hypot(O1, O2) <= plan.window
        offsets = np.stack([O1[disk], O2[disk]], axis=1)
        for c in plan.focus_points:
            pts = np.asarray(c, dtype=float)[None, :] + offsets
            v = values(pts)
            best = max(best, _max_quotient(pts, v, pts, v, alpha, L))
        if plan.n_random:
            p = rng.uniform(0, L, size=(plan.n_random, 2))
            q = rng.uniform(0, L, size=(plan.n_random, 2))
            best = max(best, _pair_quotient(p, q, values(p), values(q), alpha, L))
        if len(plan.pairs):
            pr = np.asarray(plan.pairs, dtype=float)
            best = max(best, _pair_quotient(pr[:, 0], pr[:, 1], values(pr[:, 0]),
                                            values(pr[:, 1]), alpha, L))
        return best

    f = np.asarray(f, dtype=float)
    X1, X2 = grid.mesh
    nodes = np.stack([X1.ravel(), X2.ravel()], axis=1)
    vals = f.ravel()
    for c in plan.focus_points:
        d = periodic_delta(nodes, np.asarray(c, dtype=float)[None, :], L)
        sel = np.hypot(d[:, 0], d[:, 1]) <= plan.window
        pts, v = nodes[sel], vals[sel]
        best = max(best, _max_quotient(pts, v, pts, v, alpha, L))
    if plan.n_random:
        i = rng.integers(0, vals.size, plan.n_random)
        j = rng.integers(0, vals.size, plan.n_random)
        best = max(best, _pair_quotient(nodes[i], nodes[j], vals[i], vals[j], alpha, L))
    if len(plan.pairs):
        pr = np.asarray(plan.pairs, dtype=float)
        idx = [np.ravel_multi_index(tuple(np.rint(p / grid.dx).astype(int) % grid.n), f.shape)
               for p in pr.reshape(-1, 2)]
        idx = np.asarray(idx).reshape(-1, 2)
        best = max(best, _pair_quotient(nodes[idx[:, 0]], nodes[idx[:, 1]],
                                        vals[idx[:, 0]], vals[idx[:, 1]], alpha, L))
    return best


def little_holder_profile(grid: Grid2D, f: np.ndarray, alpha: float, x0):
    """Local modulus ``omega(h) / h^alpha`` at the grid node nearest ``x0``.

    ``omega(h) = max_{|y - x0| <= h} |f(y) - f(x0)|`` for ``h = dx, 2 dx, 4 dx, ...``
    up to a quarter of the domain.  Returned with ``h`` decreasing, so the
    profile tends to 0 from left to right exactly when ``f`` is little-Hoelder at x0.
    """
    i0 = tuple(np.rint(np.asarray(x0, dtype=float) / grid.dx).astype(int) % grid.n)
    X1, X2 = grid.mesh
    d = periodic_delta(np.stack([X1, X2]), np.array([X1[i0], X2[i0]])[:, None, None], grid.length)
    dist = np.hypot(d[0], d[1])
    jump = np.abs(f - f[i0])
    hs = []
    h = grid.dx
    while h <= grid.length / 4 + 1e-12:
        hs.append(h)
        h *= 2
    hs = np.array(hs[::-1])
    ratio = np.array([jump[dist <= h * (1 + 1e-12)].max() / h**alpha for h in hs])
    return hs, ratio


# --- support inequalities ---------------------------------------------------

def support_mask(f: np.ndarray) -> np.ndarray:
    peak = float(np.max(np.abs(f)))
    return np.abs(f) > 1e-14 * peak if peak > 0 else np.zeros(f.shape, dtype=bool)


def disjoint_support_ratio(grid: Grid2D, f: np.ndarray, g: np.ndarray, s: float) -> float:
    """``||f+g||^2_{H^s} / (||f||^2_{H^s} + ||g||^2_{H^s})`` for disjointly supported f, g."""
    if np.any(support_mask(f) & support_mask(g)):
        raise OverlappingSupports("f and g share support points")
    nf = sobolev_norm(grid, f, s) ** 2
    ng = sobolev_norm(grid, g, s) ** 2
    # ||f+g||^2 = ||f||^2 + ||g||^2 + 2<f,g>; the cross term avoids cancellation and
    # for s = 0 is the pointwise product, which vanishes exactly on disjoint supports
    if s == 0:
        cross = float(np.mean(f * g))
    else:
        w = sobolev_weight(grid, s, False)
        cross = float(np.sum(w * np.real(np.conj(sp.fft(grid, f)) * sp.fft(grid, g))))
    return 1.0 + 2 * cross / (nf + ng)


def _homogeneous_sq(values: np.ndarray, length: float, s: float) -> float:
    """Squared ``Hdot^s`` norm on a periodic box of side ``length`` in 1 or 2 dimensions."""
    n = values.shape[0]
    d = values.ndim
    fh = np.fft.fftn(values) / n**d
    m = np.fft.fftfreq(n, 1.0 / n) * (2 * math.pi / length)
    if d == 1:
        ksq = m**2
    else:
        ksq = m[:, None] ** 2 + m[None, :] ** 2
    ksq.flat[0] = 1.0
    w = ksq**s
    w.flat[0] = 0.0
    return float(np.sum(w * np.abs(fh) ** 2)) * length**d


def _is_dyadic(lam: float) -> bool:
    if lam < 1:
        return False
    e = math.log2(lam)
    return abs(e - round(e)) < 1e-12


def scaling_ratio(profile: Callable, lam: float, s: float, d: int,
                  n: int = 4096, length: float = 16 * math.pi) -> float:
    """Measured ``||f(./lam)||^2 / ||f||^2`` in ``Hdot^s`` divided by ``lam**(d-2s)``.

    ``profile`` is a radial function of distance from the box centre; the
    ideal return value is 1 and deviations come from the periodic truncation.
    """
    if d not in (1, 2):
        raise ValueError("d must be 1 or 2")
    if not _is_dyadic(lam):
        raise NonDyadic(f"lambda must be a power of two, got {lam}")
    if lam == 1:
        return 1.0
    x = np.arange(n) * (length / n) - length / 2
    if d == 1:
        r = np.abs(x)
    else:
        r = np.hypot(x[:, None], x[None, :])
    base = _homogeneous_sq(profile(r), length, s)
    scaled = _homogeneous_sq(profile(r / lam), length, s)
    return scaled / base / lam ** (d - 2 * s)


def norm_equivalence_constants(grid: Grid2D, fields: Sequence[np.ndarray], s: float):
    """Range of ``||f||_{Hdot^s} / ||f||_{H^s}`` over a family of fields."""
    r = [sobolev_norm(grid, f, s, True) / sobolev_norm(grid, f, s, False) for f in fields]
    return min(r), max(r)
