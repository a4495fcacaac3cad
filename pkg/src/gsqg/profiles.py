"""Closed-form test profiles: smooth bumps, plateau cutoffs and the Hoelder cusp."""
from __future__ import annotations

import numpy as np

from .spectral import Grid2D


def bump(rho):
    """Smooth compactly supported bump ``exp(1 - 1/(1 - rho^2))`` on ``rho < 1``; peak 1."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    inside = np.abs(rho) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - rho[inside] ** 2))
    return out


def smoothstep(t):
    """C-infinity transition equal to 0 for ``t <= 0`` and 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)

    def psi(s):
        out = np.zeros_like(s)
        pos = s > 0
        out[pos] = np.exp(-1.0 / s[pos])
        return out

    a = psi(t)
    b = psi(1.0 - t)
    return a / (a + b)


def plateau(rho):
    """Cutoff equal to 1 for ``rho <= 1`` and 0 for ``rho >= 2``."""
    return 1.0 - smoothstep(np.asarray(rho, dtype=float) - 1.0)


def periodic_offset(grid: Grid2D, centre, x1=None, x2=None):
    """Minimal-image offsets ``x - centre`` on the torus."""
    if x1 is None:
        x1, x2 = grid.mesh
    L = grid.length
    d1 = (np.asarray(x1) - centre[0] + L / 2) % L - L / 2
    d2 = (np.asarray(x2) - centre[1] + L / 2) % L - L / 2
    return d1, d2


def bump_field(grid: Grid2D, centre, radius: float, amplitude: float = 1.0) -> np.ndarray:
    d1, d2 = periodic_offset(grid, centre)
    return amplitude * bump(np.hypot(d1, d2) / radius)


def cusp(r, alpha: float, cutoff: float):
    """``chi(r / cutoff) * r**alpha``: Hoelder-alpha at ``r = 0`` but not little-Hoelder."""
    r = np.asarray(r, dtype=float)
    return plateau(r / cutoff) * np.abs(r) ** alpha


def taylor_green(grid: Grid2D) -> np.ndarray:
    X1, X2 = grid.mesh
    return np.sin(X1) * np.sin(X2)
