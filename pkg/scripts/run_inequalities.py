"""Separated-support and dilation sweeps of the Sobolev norms.

    python scripts/run_inequalities.py --out results/inequalities
"""
import argparse

from gsqg.experiments import InequalityConfig, run_inequality_sweep


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=512)
    p.add_argument("--out", default="results/inequalities")
    args = p.parse_args()
    rep = run_inequality_sweep(InequalityConfig(n=args.n))
    rep.write(args.out, "inequalities")
    print("c(s):", {s: round(c, 4) for s, c in rep.summary["c_s"].items()})
    print(f"max scaling deviation: {rep.summary['max_scaling_deviation']:.2e}")
    print(f"verdict: {'pass' if rep.verdict else 'fail'}")


if __name__ == "__main__":
    main()
