"""Monte Carlo check of the disagreement-mass and ERM bounds on thresholds.

Writes one CSV row per (trial, m) plus a JSON report next to it.
"""
import argparse

from vslab.harness import ExperimentConfig, run_validation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240611)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out", default="thresholds_validation.csv")
    args = ap.parse_args()
    cfg = ExperimentConfig(
        cls=f"thresholds({args.n})", m_grid=[32, 128, 512], target=args.n // 2, delta=0.1,
        trials=args.trials, seed=args.seed, quantities=["sup_er", "pdis", "nhat", "closure_er"],
        bounds=[{"name": "pdis_nhat", "quantity": "pdis"},
                {"name": "closure", "quantity": "closure_er"},
                {"name": "closure_expectation", "quantity": "closure_er"},
                {"name": "erm_nhat", "quantity": "sup_er"},
                {"name": "erm_subregion", "quantity": "sup_er", "c": 16}])
    report = run_validation(cfg, workers=args.workers, out=args.out)
    for c in report.checks:
        print(f"{c.verdict:14s} {c.bound:20s} m={c.m:<4d} violations={c.violations}/{c.trials} "
              f"mean={c.mean:.4g} bound={c.bound_value:.4g}")


if __name__ == "__main__":
    main()
