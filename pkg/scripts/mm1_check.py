"""Drive one switch egress port as an M/M/1 queue and compare with theory.

    python scripts/mm1_check.py --rho 0.3 0.5 0.7 --frames 100000
"""
import argparse

from campusnet.validation import mm1_port_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, nargs="+", default=[0.5])
    ap.add_argument("--frames", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    print(f"{'rho':>5}{'sojourn_us':>12}{'theory_us':>12}{'err':>9}{'little_err':>12}")
    for rho in args.rho:
        r = mm1_port_experiment(rho=rho, frames=args.frames, seed=args.seed)
        print(f"{rho:>5.2f}{r.mean_sojourn_s * 1e6:>12.3f}{r.predicted_sojourn_s * 1e6:>12.3f}"
              f"{r.sojourn_rel_error:>9.2%}{r.little_rel_error:>12.2%}")


if __name__ == "__main__":
    main()
