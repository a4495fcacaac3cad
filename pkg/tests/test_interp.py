import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gsqg import interp, spectral as sp
from gsqg.spectral import Grid2D


def direct_sum(grid, f, x1, x2):
    """O(n^2)-per-point trigonometric sum, the oracle for the NUFFT path."""
    c = np.fft.fft2(f) / grid.n**2
    m = np.fft.fftfreq(grid.n, 1.0 / grid.n)
    k = m * grid.scale
    out = np.empty(len(x1))
    for i, (a, b) in enumerate(zip(x1, x2)):
        out[i] = np.real(np.sum(c * np.exp(1j * (k[:, None] * a + k[None, :] * b))))
    return out


@pytest.mark.parametrize("length", [2 * math.pi, 3.0])
def test_trig_eval_matches_direct_sum(length):
    grid = Grid2D(32, length)
    rng = np.random.default_rng(4)
    f = sp.random_field(grid, rng)
    x1, x2 = rng.uniform(-length, 2 * length, (2, 40))
    exact = direct_sum(grid, f, x1, x2)
    assert np.max(np.abs(interp.trig_eval(grid, f, x1, x2) - exact)) <= 1e-12 * np.max(np.abs(f))


def test_trig_eval_reproduces_grid_values_and_stacks(grid, rng):
    f = np.stack([sp.random_field(grid, rng), sp.random_field(grid, rng)])
    X1, X2 = grid.mesh
    out = interp.trig_eval(grid, f, X1, X2)
    assert out.shape == f.shape
    assert np.max(np.abs(out - f)) <= 1e-12


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_trig_eval_is_periodic(a, b):
    grid = Grid2D(16)
    f = sp.random_field(grid, np.random.default_rng(0))
    p = interp.trig_eval(grid, f, np.array([a, a + grid.length]), np.array([b, b - grid.length]))
    assert abs(p[0] - p[1]) <= 1e-12


def test_spline_eval_order(rng):
    # cubic B-splines: error drops by ~16 per grid doubling on smooth data
    errs = []
    pts = rng.uniform(0, 2 * math.pi, (2, 200))
    for n in (32, 64, 128):
        grid = Grid2D(n)
        X1, X2 = grid.mesh
        f = np.sin(X1) * np.cos(2 * X2)
        errs.append(np.max(np.abs(interp.spline_eval(grid, f, *pts) - np.sin(pts[0]) * np.cos(2 * pts[1]))))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.5)
