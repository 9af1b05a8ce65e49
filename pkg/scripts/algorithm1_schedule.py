"""Round tolerances of the subregion learner as m grows.

A round whose tolerance is at least 1 selects an empty region and removes
nothing, so this table shows the sample size at which the learner starts to
filter on a given class.
"""
import argparse
from fractions import Fraction

from vslab.concept import make_class
from vslab.learners import algorithm1_schedule
from vslab.version_space import Distribution


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--class", dest="cls", default="thresholds(16)")
    ap.add_argument("--beta", default="0.1")
    ap.add_argument("--c0", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=0.1)
    args = ap.parse_args()
    cls = make_class(args.cls)
    dist = Distribution.uniform(cls.n)
    a = 1 / (1 - 2 * Fraction(args.beta))
    print("m,rounds,active_rounds,smallest_tolerance")
    for e in range(3, 21):
        s = algorithm1_schedule(cls, dist, 2 ** e, args.delta, a, 1, args.c0)
        active = sum(1 for t in s.etas if t < 1)
        print(f"{2 ** e},{len(s.etas)},{active},{float(min(s.etas[1:], default=s.etas[0])):.4g}")


if __name__ == "__main__":
    main()
