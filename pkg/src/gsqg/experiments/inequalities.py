"""Sweeps of the Sobolev inequalities for separated supports and for dilations."""
from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass

import numpy as np

from .. import norms, profiles
from ..spectral import Grid2D
from .report import ExperimentReport

SCALING_TOL = 2e-2


@dataclass
class InequalityConfig:
    n: int = 512
    radii: tuple = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
    s_disjoint: tuple = (-1.0, 0.0, 0.5, 2.5)
    centre_spacing: float = 4.0            # bump centres 4r apart (gap 2r)
    c_min: float = 0.02
    lambdas: tuple = (2.0, 4.0)
    s_scaling: tuple = (0.5, 1.0, 1.5, 2.5)
    dims: tuple = (1, 2)
    scaling_n: dict = dataclasses.field(default_factory=lambda: {1: 4096, 2: 2048})
    scaling_length: float = 16 * math.pi
    scaling_tol: float = SCALING_TOL


def disjoint_pair(grid: Grid2D, r: float, spacing: float = 4.0):
    """Two bumps of radius ``r`` on the horizontal line through the centre."""
    c = grid.length / 2
    f = profiles.bump_field(grid, (c - spacing * r / 2, c), r)
    g = profiles.bump_field(grid, (c + spacing * r / 2, c), r)
    return f, g


def run_inequality_sweep(cfg: InequalityConfig | None = None) -> ExperimentReport:
    cfg = cfg or InequalityConfig()
    t0 = time.perf_counter()
    grid = Grid2D(cfg.n)
    records = []
    ratios = {}
    for r in cfg.radii:
        f, g = disjoint_pair(grid, r, cfg.centre_spacing)
        for s in cfg.s_disjoint:
            q = norms.disjoint_support_ratio(grid, f, g, s)
            ratios.setdefault(s, []).append(q)
            records.append({"kind": "disjoint", "s": s, "r": r, "value": q,
                            "pass": bool(q >= cfg.c_min)})
    prof = profiles.bump
    for d in cfg.dims:
        for lam in cfg.lambdas:
            for s in cfg.s_scaling:
                q = norms.scaling_ratio(prof, lam, s, d, n=cfg.scaling_n[d], length=cfg.scaling_length)
                records.append({"kind": "scaling", "s": s, "d": d, "lambda": lam, "value": q,
                                "deviation": abs(q - 1), "pass": bool(abs(q - 1) <= cfg.scaling_tol)})
    c_s = {str(s): min(v) for s, v in ratios.items()}
    max_dev = max(r["deviation"] for r in records if r["kind"] == "scaling")
    verdict = all(r["pass"] for r in records)
    return ExperimentReport(
        name="inequalities",
        config=dataclasses.asdict(cfg),
        records=records,
        thresholds={"c_min": cfg.c_min, "scaling_tol": cfg.scaling_tol},
        summary={"c_s": c_s, "max_ratio": {str(s): max(v) for s, v in ratios.items()},
                 "max_scaling_deviation": max_dev},
        verdict=verdict,
        timing={"seconds": time.perf_counter() - t0},
    )
