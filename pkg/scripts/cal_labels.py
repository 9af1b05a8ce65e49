"""Label usage, error and coverage of the disagreement-based active learner per label budget."""
import argparse

from vslab.concept import make_class
from vslab.harness import cal_curve
from vslab.version_space import Distribution


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--class", dest="cls", default="thresholds(64)")
    ap.add_argument("--target", type=int, default=32)
    ap.add_argument("--budgets", default="0,1,2,4,6,8,10,12")
    ap.add_argument("--trials", type=int, default=500)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    cls = make_class(args.cls)
    budgets = [int(b) for b in args.budgets.split(",")]
    print(cal_curve(cls, Distribution.uniform(cls.n), args.target, budgets, args.trials, args.seed), end="")


if __name__ == "__main__":
    main()
