"""Off-grid evaluation of periodic grid fields.

Two routes are offered: exact trigonometric evaluation of the band-limited
interpolant (a type-2 non-uniform FFT) and cubic B-spline interpolation with
periodic wrap.  The first is exact for band-limited data, the second is fast and
local.
"""
from __future__ import annotations

import finufft
import numpy as np
import scipy.fft as sfft
from scipy import ndimage

from .spectral import Grid2D, fft_workers

NUFFT_EPS = 1e-13


def trig_eval_spectrum(grid: Grid2D, spectrum: np.ndarray, x1, x2) -> np.ndarray:
    """Evaluate ``sum_k c_k exp(i k.x)`` (real part) for fft2-ordered coefficients.

    ``spectrum`` may carry a leading stack axis; the output then has shape
    ``(stack, npoints)``.
    """
    shp = np.shape(x1)
    s = grid.scale
    p1 = np.ascontiguousarray(np.ravel(x1) * s % (2 * np.pi), dtype=float)
    p2 = np.ascontiguousarray(np.ravel(x2) * s % (2 * np.pi), dtype=float)
    c = np.ascontiguousarray(spectrum, dtype=complex)
    out = finufft.nufft2d2(p1, p2, c, isign=1, eps=NUFFT_EPS, modeord=1, nthreads=fft_workers())
    out = np.real(out)
    if c.ndim == 3:
        return out.reshape((c.shape[0],) + shp)
    return out.reshape(shp)


def trig_eval(grid: Grid2D, f: np.ndarray, x1, x2) -> np.ndarray:
    """Trigonometric interpolant of grid field(s) ``f`` at points ``(x1, x2)``."""
    f = np.asarray(f, dtype=float)
    spec = sfft.fft2(f, axes=(-2, -1), workers=fft_workers()) / grid.n**2
    return trig_eval_spectrum(grid, spec, x1, x2)


def spline_eval(grid: Grid2D, f: np.ndarray, x1, x2) -> np.ndarray:
    """Periodic cubic B-spline interpolation of ``f`` at ``(x1, x2)``."""
    f = np.asarray(f, dtype=float)
    c = np.stack([np.asarray(x1) / grid.dx, np.asarray(x2) / grid.dx])
    if f.ndim == 3:
        return np.stack([spline_eval(grid, fc, x1, x2) for fc in f])
    return ndimage.map_coordinates(f, c, order=3, mode="grid-wrap")


def compose(grid: Grid2D, f: np.ndarray, displacement: np.ndarray, mode: str = "bicubic") -> np.ndarray:
    """``f o (id + d)`` on the grid: ``f`` evaluated at ``x + d(x)``."""
    displacement = np.asarray(displacement, dtype=float)
    if np.max(np.abs(displacement), initial=0.0) >= grid.length / 2:
        raise ValueError("displacement must stay below half the domain length")
    X1, X2 = grid.mesh
    y1 = X1 + displacement[0]
    y2 = X2 + displacement[1]
    if mode == "trig":
        return trig_eval(grid, f, y1, y2)
    if mode == "bicubic":
        return spline_eval(grid, f, y1, y2)
    raise ValueError(f"unknown interpolation mode {mode!r}")
