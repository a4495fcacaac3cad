"""Periodic grid, Fourier transforms and the multiplier operators of the gSQG family.

Fields are plain numpy arrays sampled on a :class:`Grid2D`: a scalar field has
shape ``(n, n)`` with ``f[i, j] = f(x1_i, x2_j)``, a vector field has shape
``(2, n, n)``.  Fourier coefficients follow the normalisation

    f_hat(k) = n**-2 * sum_j f(x_j) exp(-i k . x_j),

so that Parseval reads ``sum |f_hat|**2 == mean(f**2)``.  Mode numbers run over
``-n/2+1 .. n/2``; operators that are odd in a wavenumber component (derivatives,
Riesz transforms) vanish on the corresponding Nyquist line, which keeps every
output real.  Negative powers of the Laplacian act only on mean-zero fields.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.fft as sfft
from scipy.special import gamma as gamma_fn

from .errors import NonZeroMean, PointInsideSupport

MEAN_TOL = 1e-12


def fft_workers() -> int:
    """Worker count for FFTs, capped by the ``GSQG_THREADS`` environment variable."""
    cap = os.environ.get("GSQG_THREADS")
    ncpu = os.cpu_count() or 1
    if cap:
        try:
            return max(1, min(int(cap), ncpu))
        except ValueError:
            pass
    return ncpu


@dataclass(frozen=True)
class Grid2D:
    """Uniform ``n x n`` grid on the periodic square ``[0, length)**2``."""

    n: int
    length: float = 2 * math.pi
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 16 or self.n % 2:
            raise ValueError(f"grid size must be an even integer >= 16, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"domain length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def shape(self):
        return (self.n, self.n)

    @property
    def scale(self) -> float:
        """Conversion from integer mode number to wavenumber."""
        return 2 * math.pi / self.length

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.dx

    @cached_property
    def mesh(self):
        return np.meshgrid(self.x, self.x, indexing="ij")

    @cached_property
    def modes(self):
        """Integer mode numbers in rfft layout, shapes ``(n, 1)`` and ``(1, n//2+1)``."""
        n = self.n
        m1 = np.fft.fftfreq(n, 1.0 / n)
        m1[n // 2] = n // 2
        m2 = np.arange(n // 2 + 1, dtype=float)
        return m1[:, None], m2[None, :]

    @cached_property
    def k(self):
        m1, m2 = self.modes
        return m1 * self.scale, m2 * self.scale

    @cached_property
    def ksq(self) -> np.ndarray:
        k1, k2 = self.k
        return k1**2 + k2**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def ik(self):
        """Spectral derivative multipliers ``i k_j`` with the Nyquist line removed."""
        k1, k2 = self.k
        m1, m2 = self.modes
        n2 = self.n // 2
        d1 = np.where(np.abs(m1) == n2, 0.0, 1j * k1)
        d2 = np.where(m2 == n2, 0.0, 1j * k2)
        return d1, d2

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        m1, m2 = self.modes
        cut = self.n / 3
        return (np.abs(m1) <= cut) & (np.abs(m2) <= cut)

    @cached_property
    def hermitian_weight(self) -> np.ndarray:
        """Multiplicity of each rfft coefficient in the full spectrum."""
        w = np.full((self.n, self.n // 2 + 1), 2.0)
        w[:, 0] = 1.0
        w[:, -1] = 1.0
        return w

    def power(self, p: float) -> np.ndarray:
        """``|k|**p`` with the zero mode set to 0 (for any ``p``)."""
        key = ("pow", float(p))
        out = self._cache.get(key)
        if out is None:
            kk = self.kmag.copy()
            kk[0, 0] = 1.0
            out = kk**p
            out[0, 0] = 0.0
            self._cache[key] = out
        return out

    def mode_index(self, k1: int, k2: int):
        """Index of integer mode ``(k1, k2)`` in the full (fft2) layout."""
        return (k1 % self.n, k2 % self.n)


# --- transforms -------------------------------------------------------------

def fft(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Half-plane (rfft) coefficients with the package normalisation."""
    return sfft.rfft2(f, workers=fft_workers()) / grid.n**2


def ifft(grid: Grid2D, fh: np.ndarray) -> np.ndarray:
    return sfft.irfft2(fh * grid.n**2, s=grid.shape, workers=fft_workers())


def to_spectrum(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Full complex spectrum in fft2 order, ``f_hat(k) = n^-2 sum f e^{-ik.x}``."""
    return sfft.fft2(f, workers=fft_workers()) / grid.n**2


def to_field(grid: Grid2D, spectrum: np.ndarray) -> np.ndarray:
    return np.real(sfft.ifft2(spectrum * grid.n**2, workers=fft_workers()))


def rms(f: np.ndarray) -> float:
    peak = float(np.max(np.abs(f))) if np.size(f) else 0.0
    if peak == 0.0 or not np.isfinite(peak):
        return peak
    return peak * float(np.sqrt(np.mean(np.square(np.asarray(f) / peak))))


def require_mean_zero(f: np.ndarray, what: str = "field") -> None:
    m = float(np.mean(f))
    if abs(m) > MEAN_TOL * max(rms(f), np.finfo(float).tiny):
        raise NonZeroMean(f"{what} has mean {m:.3e}; the operator needs mean-zero input")


# --- multipliers ------------------------------------------------------------

def fractional_laplacian(grid: Grid2D, f: np.ndarray, sigma: float) -> np.ndarray:
    """``(-Delta)**sigma`` as the multiplier ``|k|**(2 sigma)``.

    The zero mode is dropped for ``sigma > 0`` and forbidden for ``sigma < 0``.
    """
    if sigma == 0:
        return np.array(f, dtype=float, copy=True)
    if sigma < 0:
        require_mean_zero(f)
    return ifft(grid, fft(grid, f) * grid.power(2 * sigma))


def riesz_transform(grid: Grid2D, f: np.ndarray, axis: int) -> np.ndarray:
    """``R_axis = d_axis (-Delta)**(-1/2)``, multiplier ``i k_axis / |k|``.

    The zero mode is annihilated rather than rejected.
    """
    d = grid.ik[_axis(axis)]
    return ifft(grid, fft(grid, f) * d * grid.power(-1.0))


def _axis(axis: int) -> int:
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    return axis - 1


def velocity_hat(grid: Grid2D, theta_hat: np.ndarray, beta: float):
    """Spectral velocity ``u = -grad_perp (-Delta)^(-1+beta/2) theta``."""
    d1, d2 = grid.ik
    m = grid.power(beta - 2.0)
    return d2 * m * theta_hat, -d1 * m * theta_hat


def velocity_from_theta(grid: Grid2D, theta: np.ndarray, beta: float) -> np.ndarray:
    """Velocity ``(S_{beta,2} theta, -S_{beta,1} theta)`` of an active scalar."""
    require_mean_zero(theta, "theta")
    u1h, u2h = velocity_hat(grid, fft(grid, theta), beta)
    return np.stack([ifft(grid, u1h), ifft(grid, u2h)])


def theta_hat_from_velocity(grid: Grid2D, u1h, u2h, beta: float):
    d1, d2 = grid.ik
    return grid.power(1.0 - beta) * grid.power(-1.0) * (d1 * u2h - d2 * u1h)


def theta_from_velocity(grid: Grid2D, u: np.ndarray, beta: float) -> np.ndarray:
    """``theta = (-Delta)^((1-beta)/2) (R1 u2 - R2 u1)``; inverts :func:`velocity_from_theta`."""
    th = theta_hat_from_velocity(grid, fft(grid, u[0]), fft(grid, u[1]), beta)
    return ifft(grid, th)


def curl_inverse(grid: Grid2D, omega: np.ndarray) -> np.ndarray:
    """``curl^-1 = -grad_perp (-Delta)^-1`` on mean-zero scalars."""
    require_mean_zero(omega, "omega")
    u1h, u2h = velocity_hat(grid, fft(grid, omega), 0.0)
    return np.stack([ifft(grid, u1h), ifft(grid, u2h)])


def gradient(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    fh = fft(grid, f)
    d1, d2 = grid.ik
    return np.stack([ifft(grid, d1 * fh), ifft(grid, d2 * fh)])


def perp_gradient(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    """Symplectic gradient ``(-d2 f, d1 f)``."""
    g = gradient(grid, f)
    return np.stack([-g[1], g[0]])


def divergence(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    d1, d2 = grid.ik
    return ifft(grid, d1 * fft(grid, v[0]) + d2 * fft(grid, v[1]))


def curl(grid: Grid2D, v: np.ndarray) -> np.ndarray:
    """Scalar curl ``d1 v2 - d2 v1``."""
    d1, d2 = grid.ik
    return ifft(grid, d1 * fft(grid, v[1]) - d2 * fft(grid, v[0]))


def dealias(grid: Grid2D, spectrum: np.ndarray) -> np.ndarray:
    """Two-thirds rule on a full (fft2-order) spectrum: zero modes with max|m| > n/3."""
    n = grid.n
    m = np.fft.fftfreq(n, 1.0 / n)
    keep = (np.abs(m)[:, None] <= n / 3) & (np.abs(m)[None, :] <= n / 3)
    return np.where(keep, spectrum, 0.0)


def truncate(grid: Grid2D, fh: np.ndarray) -> np.ndarray:
    """Two-thirds rule on half-plane coefficients."""
    return fh * grid.dealias_mask


def dealias_field(grid: Grid2D, f: np.ndarray) -> np.ndarray:
    return ifft(grid, truncate(grid, fft(grid, f)))


# --- free-space kernel ------------------------------------------------------

def pv_kernel_constant(beta: float) -> float:
    """Constant ``C_beta`` of the free-space kernel of ``S_{beta,k}``.

    ``S_{beta,k} theta(x) = -C_beta p.v. int (x_k - y_k) |x-y|^-(2+beta) theta(y) dy``,
    obtained by differentiating the Riesz potential of order ``2-beta``;
    ``C_0 = 1/(2 pi)`` recovers the Biot-Savart law.
    """
    return 2 * gamma_fn(1 + beta / 2) / (4 ** (1 - beta / 2) * math.pi * gamma_fn(1 - beta / 2))


def pv_kernel_eval(grid: Grid2D, theta: np.ndarray, x, beta: float, axis: int) -> float:
    """Midpoint-rule quadrature of the free-space kernel of ``S_{beta,axis}`` at ``x``.

    Grid coordinates are taken as points of the plane (no periodisation), so the
    result is the whole-space value for data supported inside the box.
    """
    a = _axis(axis)
    x = np.asarray(x, dtype=float)
    support = np.abs(theta) > 1e-14 * max(float(np.max(np.abs(theta))), np.finfo(float).tiny)
    if not support.any():
        return 0.0
    X1, X2 = grid.mesh
    dy1 = x[0] - X1[support]
    dy2 = x[1] - X2[support]
    r = np.hypot(dy1, dy2)
    if r.min() < 2 * grid.dx:
        raise PointInsideSupport(
            f"evaluation point is {r.min():.3g} from the support (needs >= {2 * grid.dx:.3g})"
        )
    num = dy1 if a == 0 else dy2
    val = np.sum(num / r ** (2 + beta) * theta[support]) * grid.dx**2
    return float(-pv_kernel_constant(beta) * val)


# --- test data --------------------------------------------------------------

def random_field(grid: Grid2D, rng: np.random.Generator, kmax: int | None = None,
                 amplitude: float = 1.0, decay: float = 0.0) -> np.ndarray:
    """Random real mean-zero field with modes ``max|m| <= kmax`` and RMS ``amplitude``.

    ``kmax`` defaults to ``n/2 - 1`` so the Nyquist lines carry no energy;
    ``decay`` imposes a spectral slope ``|m|**-decay``.
    """
    n = grid.n
    if kmax is None:
        kmax = n // 2 - 1
    kmax = min(kmax, n // 2 - 1)
    m1, m2 = grid.modes
    mask = (np.abs(m1) <= kmax) & (m2 <= kmax)
    mask[0, 0] = False
    coeffs = rng.standard_normal(mask.shape) + 1j * rng.standard_normal(mask.shape)
    if decay:
        mm = np.sqrt(m1**2 + m2**2)
        mm[0, 0] = 1.0
        coeffs = coeffs * mm**-decay
    f = ifft(grid, np.where(mask, coeffs, 0.0))
    f -= f.mean()
    norm = rms(f)
    return f * (amplitude / norm) if norm > 0 else f
