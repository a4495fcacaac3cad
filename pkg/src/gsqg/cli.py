"""Command-line entry point ``gsqg``.

Subcommands::

    gsqg simulate   [--config FILE] [--out DIR]
    gsqg experiment {nonuniform,holder,dichotomy,inequalities} [--config FILE] [--out DIR] [--quick]
    gsqg norms      FIELD.gfld [--s S] [--beta B]
    gsqg selftest

Exit status: 0 on success or a passing experiment, 1 on a failing experiment or
a runtime error, 2 on a usage or configuration error.  Set ``GSQG_THREADS`` to
cap FFT threads and the number of worker processes.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time

import numpy as np

from . import config as cfgmod
from . import eulerian, fieldio, norms, profiles
from . import spectral as sp
from .errors import GSQGError, NonZeroMean, ParseError, ValidationError
from .experiments import (ExperimentReport, run_dichotomy, run_holder_boost, run_inequality_sweep,
                          run_nonuniform)
from .spectral import Grid2D

log = logging.getLogger("gsqg")

EXPERIMENTS = ("nonuniform", "holder", "dichotomy", "inequalities")
STATIONARY_DRIFT_TOL = 1e-8


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gsqg", description="gSQG pseudo-spectral laboratory on the 2-torus")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")
    sim = sub.add_parser("simulate", help="evolve initial data and write diagnostics")
    sim.add_argument("--config")
    sim.add_argument("--out")
    ex = sub.add_parser("experiment", help="run one of the numerical experiments")
    ex.add_argument("kind", choices=EXPERIMENTS)
    ex.add_argument("--config")
    ex.add_argument("--out")
    ex.add_argument("--quick", action="store_true", help="small desk-check sizes")
    nm = sub.add_parser("norms", help="norms of a field file")
    nm.add_argument("field")
    nm.add_argument("--s", type=float, default=2.5)
    nm.add_argument("--beta", type=float, default=0.0)
    sub.add_parser("selftest", help="exact operator checks on pure modes")
    return p


def _workers() -> int:
    cap = os.environ.get("GSQG_THREADS")
    try:
        return max(1, int(cap)) if cap else 1
    except ValueError:
        return 1


def _load(path: str | None, kind: str) -> cfgmod.RunConfig:
    if path is None:
        cfg = cfgmod.RunConfig(kind=kind)
        cfgmod.validate(cfg)
        return cfg
    cfg = cfgmod.load_config(path)
    if cfg.kind != kind:
        if cfg.options:
            raise UsageError(f"config describes experiment {cfg.kind!r}, not {kind!r}")
        cfg.kind = kind
        cfgmod.validate(cfg)
    return cfg


def _outdir(cfg: cfgmod.RunConfig, override: str | None) -> str:
    d = override or cfg.output.directory
    os.makedirs(os.path.join(d, "fields"), exist_ok=True)
    return d


def _write_report(report: ExperimentReport, directory: str) -> None:
    with open(os.path.join(directory, "summary.json"), "w") as fh:
        fh.write(report.to_json())
    with open(os.path.join(directory, "series.csv"), "w") as fh:
        fh.write(report.to_csv())


# --- simulate ---------------------------------------------------------------

def initial_theta(cfg: cfgmod.RunConfig, opts) -> np.ndarray:
    grid = Grid2D(cfg.domain.n, cfg.domain.length)
    if opts.initial == "taylor_green":
        X1, X2 = grid.mesh
        s = grid.scale
        return opts.amplitude * np.sin(s * X1) * np.sin(s * X2)
    if opts.initial == "random":
        rng = np.random.default_rng(cfg.output.seed)
        return sp.random_field(grid, rng, kmax=opts.kmax, amplitude=opts.amplitude)
    f = profiles.bump_field(grid, (grid.length / 2, grid.length / 2), grid.length / 6, opts.amplitude)
    return f - f.mean()


def run_simulate(cfg: cfgmod.RunConfig, outdir: str) -> ExperimentReport:
    t0 = time.perf_counter()
    opts = cfgmod.build_experiment(cfg)
    grid = Grid2D(cfg.domain.n, cfg.domain.length)
    beta, s = cfg.physics.beta, cfg.physics.s
    theta0 = initial_theta(cfg, opts)
    state = eulerian.SimState(grid, 0.0, beta, theta=theta0, formulation=cfg.solver.formulation)
    outputs = cfg.solver.outputs or None
    traj = eulerian.integrate(state, cfg.solver.T, cfl=cfg.solver.cfl, outputs=outputs, s=s)
    for i, snap in enumerate(traj.snapshots):
        fieldio.write_field(os.path.join(outdir, "fields", f"theta_{i:04d}.gfld"), snap.scalar,
                            grid.length, snap.t)
        if cfg.solver.formulation == eulerian.VELOCITY:
            fieldio.write_field(os.path.join(outdir, "fields", f"velocity_{i:04d}.gfld"), snap.u,
                                grid.length, snap.t)
    final = traj.final().scalar
    l2 = traj.series("l2")
    ham = traj.series("hamiltonian")
    drift = norms.sobolev_norm(grid, final - sp.dealias_field(grid, theta0), s)
    records = [dict(zip(eulerian.DIAG_KEYS, row)) for row in
               zip(*(traj.series(k) for k in eulerian.DIAG_KEYS))]
    summary = {
        "drift_hs": drift,
        "l2_relative_drift": float(np.max(np.abs(l2 - l2[0])) / l2[0]) if l2[0] > 0 else 0.0,
        "hamiltonian_relative_drift": float(np.max(np.abs(ham - ham[0])) / ham[0]) if ham[0] > 0 else 0.0,
        "max_phi_l2": float(np.max(traj.series("phi_l2"))),
        "steps": len(records) - 1,
        "snapshot_times": [float(t) for t in traj.times],
    }
    thresholds = {}
    verdict = True
    if opts.initial == "taylor_green":
        # sin x1 sin x2 is a steady state for every beta
        thresholds["stationary_drift_tol"] = STATIONARY_DRIFT_TOL
        verdict = drift <= STATIONARY_DRIFT_TOL
    return ExperimentReport(name="simulate", config=dataclasses.asdict(cfg), records=records,
                            thresholds=thresholds, summary=summary, verdict=bool(verdict),
                            seeds={"initial": cfg.output.seed},
                            timing={"seconds": time.perf_counter() - t0})


# --- experiments ------------------------------------------------------------

QUICK = {
    "nonuniform": {"grid_n": 32, "eval_n": 1024, "n_list": (2, 4)},
    "holder": {"eval_n": 256, "n_random": 2000, "h_list": (0.5, 0.25, 0.125), "T_list": (0.5, 0.25, 0.125)},
    "dichotomy": {"grid_n": 32, "betas": (0.0,)},
    "inequalities": {"n": 256, "radii": (0.1, 0.3, 0.5)},
}


def run_experiment(cfg: cfgmod.RunConfig, quick: bool = False) -> ExperimentReport:
    exp = cfgmod.build_experiment(cfg)
    if quick:
        exp = dataclasses.replace(exp, **QUICK[cfg.kind])
        if cfg.kind == "dichotomy":
            exp.nonuniform = dataclasses.replace(exp.nonuniform, **QUICK["nonuniform"])
    if cfg.kind == "nonuniform":
        exp.workers = _workers()
        return run_nonuniform(exp)
    if cfg.kind == "holder":
        return run_holder_boost(exp)
    if cfg.kind == "dichotomy":
        exp.nonuniform.workers = _workers()
        return run_dichotomy(exp)
    return run_inequality_sweep(exp)


# --- norms and selftest -----------------------------------------------------

def field_norms(path: str, s: float, beta: float) -> dict:
    ff = fieldio.read_field(path)
    n = ff.values.shape[-1]
    grid = Grid2D(n, ff.length)
    out = {"time": ff.time, "ncomp": ff.ncomp, "n": n, "length": ff.length,
           "l2": norms.sobolev_norm(grid, ff.values, 0.0),
           "hs": norms.sobolev_norm(grid, ff.values, s),
           "hs_homogeneous": norms.sobolev_norm(grid, ff.values, s, True), "s": s}
    if ff.ncomp == 1:
        try:
            out["hamiltonian"] = norms.hamiltonian(grid, ff.values, beta)
            out["beta"] = beta
        except NonZeroMean:
            out["hamiltonian"] = None
    return out


def selftest_checks():
    """Exact identities on pure modes; yields ``(name, ok)``."""
    g = Grid2D(64)
    X1, X2 = g.mesh
    s1 = np.sin(X1)
    tg = np.sin(X1) * np.sin(X2)
    spec = sp.to_spectrum(g, s1)
    yield "spectrum of sin x1", bool(np.isclose(spec[g.mode_index(1, 0)], -0.5j)
                                      and np.isclose(spec[g.mode_index(-1, 0)], 0.5j)
                                      and np.sum(np.abs(spec) > 1e-14) == 2)
    spec = sp.to_spectrum(g, np.full(g.shape, 3.0))
    yield "spectrum of a constant", bool(np.isclose(spec[0, 0], 3.0) and np.sum(np.abs(spec) > 1e-14) == 1)
    f = sp.random_field(g, np.random.default_rng(0))
    yield "spectral roundtrip", bool(np.max(np.abs(sp.to_field(g, sp.to_spectrum(g, f)) - f)) <= 1e-13 * np.max(np.abs(f)))
    ok = all(np.max(np.abs(sp.fractional_laplacian(g, tg, sig) - 2**sig * tg)) <= 1e-12
             for sig in (-1.0, -0.5, 0.5, 1.0))
    yield "fractional laplacian on sin x1 sin x2", bool(ok)
    try:
        sp.fractional_laplacian(g, 1 + s1, -1.0)
        ok = False
    except NonZeroMean:
        ok = True
    yield "negative power rejects a mean", ok
    rr = sp.riesz_transform(g, sp.riesz_transform(g, f, 1), 1) + sp.riesz_transform(g, sp.riesz_transform(g, f, 2), 2)
    yield "R1^2 + R2^2 = -id", bool(np.max(np.abs(rr + f)) <= 1e-12 * np.max(np.abs(f)))
    ok = all(np.max(np.abs(sp.theta_from_velocity(g, sp.velocity_from_theta(g, f, b), b) - f))
             <= 1e-12 * np.max(np.abs(f)) for b in (0.0, 0.5, 1.0))
    yield "velocity roundtrip", bool(ok)
    yield "Taylor-Green is steady", bool(np.max(np.abs(eulerian.transport_rhs(g, tg, 0.5))) <= 1e-12)


# --- main -------------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
    except UsageError as e:
        print(f"gsqg: {e}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "selftest":
            ok = True
            for name, passed in selftest_checks():
                print(f"{'PASS' if passed else 'FAIL'} {name}")
                ok &= passed
            return 0 if ok else 1
        if args.command == "norms":
            print(json.dumps(field_norms(args.field, args.s, args.beta), sort_keys=True, indent=2))
            return 0
        kind = "simulate" if args.command == "simulate" else args.kind
        cfg = _load(args.config, kind)
        outdir = _outdir(cfg, args.out)
        if kind == "simulate":
            report = run_simulate(cfg, outdir)
        else:
            report = run_experiment(cfg, quick=args.quick)
        _write_report(report, outdir)
        print(f"{report.name}: {'PASS' if report.verdict else 'FAIL'} (artifacts in {outdir})")
        return 0 if report.verdict else 1
    except (UsageError, ParseError, ValidationError) as e:
        print(f"gsqg: {e}", file=sys.stderr)
        return 2
    except (GSQGError, OSError) as e:
        print(f"gsqg: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
