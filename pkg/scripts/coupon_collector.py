"""Frequency of sup er >= eps on the star coupon-collector construction across sample sizes."""
import argparse
from fractions import Fraction

from vslab.concept import star
from vslab.harness import run_lower_bound
from vslab.noise import realizable_star


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k", type=int, default=32)
    ap.add_argument("--eps", default="1/64")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240611)
    args = ap.parse_args()
    sc = realizable_star(star(args.k), Fraction(args.eps))
    grid = sorted({max(1, int(f * sc.regime_bound)) for f in (0.25, 0.5, 0.8, 1, 2, 4, 8)})
    print(f"regime bound {sc.regime_bound:.1f}")
    print("m,hits,trials,frequency,ci_low,ci_high,in_regime,verdict")
    for r in run_lower_bound(sc, grid, args.trials, args.seed):
        print(f"{r.m},{r.hits},{r.trials},{r.frequency:.4f},{r.ci_low:.4f},{r.ci_high:.4f},{r.in_regime},{r.verdict}")


if __name__ == "__main__":
    main()
