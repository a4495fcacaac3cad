"""Evolve a configured initial scalar and print its conservation drifts.

    python scripts/run_simulate.py scripts/configs/simulate_random.cfg
"""
import argparse
import sys

from gsqg import cli


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("config")
    p.add_argument("--out")
    args = p.parse_args()
    argv = ["simulate", "--config", args.config] + (["--out", args.out] if args.out else [])
    sys.exit(cli.main(argv))


if __name__ == "__main__":
    main()
