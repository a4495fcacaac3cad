"""Galilean-boost experiment in C^alpha (closed-form shear or a gSQG flow map).

    python scripts/run_holder.py --mode shear --out results/holder
"""
import argparse

from gsqg.experiments import HolderConfig, run_holder_boost


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--mode", choices=("shear", "flow"), default="shear")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--out", default="results/holder")
    args = p.parse_args()
    rep = run_holder_boost(HolderConfig(alpha=args.alpha, mode=args.mode))
    rep.write(args.out, f"holder_{args.mode}")
    print(f"eps0={rep.summary['eps0']:.5f}  verdict={'pass' if rep.verdict else 'fail'}")
    for r in rep.records:
        print(f"  hT={r['ell']:.3e}  sup={r['sup']:.3e}  seminorm={r['seminorm']:.4f}  "
              f"witness={r['witness']:.4f}")


if __name__ == "__main__":
    main()
