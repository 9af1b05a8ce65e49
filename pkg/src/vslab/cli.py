"""Command-line interface: ``vslab <command> ...``.

Exit codes: 0 success, 2 parameter error, 3 budget exceeded, 4 validation FAIL.
"""
from __future__ import annotations

import argparse
import json
import math
import statistics
import sys
from dataclasses import asdict
from fractions import Fraction
from pathlib import Path

from . import rng as rngmod
from .bounds import BOUNDS, evaluate_bound
from .complexity import (covering_number, disagreement_coefficient, doubling_dimension, phi, phi_c,
                         phi_hat_noise)
from .concept import GENERATORS, dumps_class, make_class, star_number, star_witness, vc_dimension, \
    is_intersection_closed
from .errors import ParameterError, VslabError
from .harness import (ExperimentConfig, cal_curve, make_dist, run_lower_bound, run_validation)
from .learners import algorithm1_schedule, run_algorithm1, run_monotone_rule
from .noise import bounded_noise_from, best_in_class, error_rates, noisy_star, realizable_star
from .version_space import LabeledSample, VersionSpaceView, compression_set_size, to_fraction


def _emit(obj, out: str | None = None) -> None:
    text = obj if isinstance(obj, str) else json.dumps(obj, sort_keys=True, default=_jsonable)
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    print(text.rstrip("\n"))


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    raise TypeError(type(v).__name__)


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParameterError(f"expected comma-separated integers, got {text!r}") from None


def _sample(cls, text: str) -> LabeledSample:
    """Parse 'p1:-1,p3:+1' (point ids or indices)."""
    pairs = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            pt, lab = tok.rsplit(":", 1)
            y = int(lab)
        except ValueError:
            raise ParameterError(f"bad sample element {tok!r}; use point:label") from None
        idx = int(pt) if pt.isdigit() else cls.space.index(pt)
        pairs.append((idx, y))
    return LabeledSample(tuple(pairs))


def _setup(args):
    cls = make_class(args.cls)
    dist = make_dist(_dist_arg(args.dist), cls.n)
    return cls, dist


def _dist_arg(text):
    if text is None or text == "uniform":
        return "uniform"
    if text.startswith("file:"):
        return text
    if "," in text:
        return [t.strip() for t in text.split(",")]
    return text


def _budget(args) -> dict:
    return {} if args.budget is None else {"budget": args.budget}


def _target_mask(cls, idx):
    if not 0 <= idx < len(cls):
        raise ParameterError(f"target index {idx} out of range")
    return cls.hypotheses[idx]


# ----------------------------------------------------------------------------
# commands

def cmd_classes(args):
    if args.action == "list":
        for name, fn in GENERATORS.items():
            print(name)
        return 0
    if not args.spec:
        raise ParameterError("classes show needs a class descriptor")
    cls = make_class(args.spec)
    if args.format == "file":
        _emit(dumps_class(cls), args.out)
    else:
        _emit({"name": cls.name, "n": cls.n, "hypotheses": len(cls), "vc": vc_dimension(cls),
               "star": star_number(cls), "intersection_closed": is_intersection_closed(cls)}, args.out)
    return 0


def cmd_measure(args):
    cls, dist = _setup(args)
    what = args.what
    out = {"measure": what, "class": cls.name}
    if what == "vc":
        out["value"] = vc_dimension(cls)
    elif what == "star":
        out["value"] = star_number(cls, args.cap)
        if out["value"] != "exceeds-cap":
            w = star_witness(cls)
            out["witness"] = {"center": w.center, "points": list(w.points), "leaves": list(w.leaves)}
    elif what == "nhat":
        if args.sample is not None:
            sample = _sample(cls, args.sample)
        else:
            pts = rngmod.draw_points(dist, args.m, rngmod.stream(args.seed, 0)).tolist()
            sample = LabeledSample.from_target(pts, _target_mask(cls, args.target))
        res = compression_set_size(cls, sample, args.mode, **_budget(args))
        out.update(value=res.size, exact=res.exact, witness=[list(p) for p in res.witness])
    elif what == "theta":
        out["value"] = disagreement_coefficient(cls, dist, _target_mask(cls, args.target), to_fraction(args.r0))
    elif what == "phi":
        view = VersionSpaceView.full(cls) if args.sample is None else None
        if view is None:
            from .version_space import version_space
            view = version_space(cls, _sample(cls, args.sample))
        res = phi(view, dist, to_fraction(args.eta), args.mode if args.mode in ("real", "binary") else "real",
                  **_budget(args))
        out.update(value=res.value, mode=res.mode, certificate=json.loads(res.certificate.to_json()))
    elif what == "phic":
        out["value"] = phi_c(cls, dist, _target_mask(cls, args.target), to_fraction(args.r0), to_fraction(args.c))
    elif what == "phihat":
        out["value"] = phi_hat_noise(cls, dist, to_fraction(args.a), to_fraction(args.alpha),
                                     to_fraction(args.r0), to_fraction(args.c))
    elif what == "doubling":
        res = doubling_dimension(cls, dist, _target_mask(cls, args.target), to_fraction(args.r0), args.centers)
        out.update(value=res.value, cover=res.worst_cover, radius=res.worst_radius, centers=res.center_pool)
    if isinstance(out.get("value"), Fraction):
        out["float"] = float(out["value"])
    _emit(out, args.out)
    return 0


def cmd_simulate(args):
    cls, dist = _setup(args)
    if args.what in ("closure", "monotone"):
        rule = "closure_error_region" if args.what == "closure" else "dis_version_space"
        tr = run_monotone_rule(rule, cls, dist, args.target, args.m, seed=args.seed, track_nhat=args.nhat)
        if args.out:
            Path(args.out).write_text(tr.to_csv())
        _emit({"rule": rule, "m": args.m, "final_mass": tr.masses[-1] if tr.masses else Fraction(0),
               "consistent": all(tr.consistent), "monotone": all(tr.monotone)})
        return 0
    if args.what == "cal":
        budgets = _ints(args.budgets)
        _emit(cal_curve(cls, dist, args.target, budgets, args.trials, args.seed), args.out)
        return 0
    if args.what == "algorithm1":
        f = _target_mask(cls, args.target)
        noise = bounded_noise_from(f, to_fraction(args.beta), (1 << cls.n) - 1, cls.n)
        er = error_rates(cls, dist, noise)
        hstar = best_in_class(cls, dist, noise)
        sched = algorithm1_schedule(cls, dist, args.m, args.delta, to_fraction(args.a), to_fraction(args.alpha), args.c0)
        cache: dict = {}
        contains, excess = 0, []
        for i in range(args.trials):
            rec = run_algorithm1(cls, dist, noise, args.m, args.delta, to_fraction(args.a), to_fraction(args.alpha),
                                 args.c0, seed=rngmod.stream(args.seed, i), schedule=sched, phi_cache=cache)
            contains += rec.final_members >> hstar & 1
            excess.append(float(er[rec.hypothesis] - er[hstar]))
        _emit({"m": args.m, "trials": args.trials, "hstar": hstar, "hstar_retained": contains / args.trials,
               "median_excess": statistics.median(excess), "etas": [float(e) for e in sched.etas]}, args.out)
        return 0
    raise ParameterError(f"unknown simulation {args.what!r}")


def cmd_bound(args):
    params = {}
    for kv in args.param or []:
        if "=" not in kv:
            raise ParameterError(f"--param expects k=v, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k.strip()] = v.strip()
    res = evaluate_bound(args.name, params)
    print(res.to_json())
    return 0


def cmd_validate(args):
    raw = json.loads(Path(args.config).read_text())
    # only flags given on the command line override the config file
    for key in ("seed", "trials", "delta", "workers"):
        if key in args.explicit:
            raw[key] = getattr(args, key)
    cfg = ExperimentConfig.from_dict(raw)
    report = run_validation(cfg, out=args.out)
    for c in report.checks:
        print(f"{c.verdict:14s} {c.bound:22s} m={c.m:<6d} violations={c.violations}/{c.trials} "
              f"ci=[{c.ci_low:.4f},{c.ci_high:.4f}] mean={c.mean:.5g} bound={c.bound_value:.5g}")
    return 0 if report.passed else 4


def cmd_lowerbound(args):
    if args.kind == "realizable":
        cls = make_class(args.cls or "star(32)")
        sc = realizable_star(cls, to_fraction(args.eps))
        grid = _ints(args.m) if args.m else [max(1, int(0.8 * sc.regime_bound))]
    else:
        sc = noisy_star(args.k, to_fraction(args.zeta), to_fraction(args.beta), args.t,
                        make_class(args.cls) if args.cls else None)
        grid = _ints(args.m) if args.m else [16, 64, 256]
    rows = run_lower_bound(sc, grid, args.trials, args.seed, args.delta if args.delta is not None else 1 / 24)
    out = {"kind": sc.kind, "threshold": sc.threshold, "regime_bound": sc.regime_bound,
           "rows": [asdict(r) for r in rows]}
    _emit(out, args.out)
    return 0 if all(r.verdict != "FAIL" for r in rows) else 4


# ----------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--trials", type=int, default=argparse.SUPPRESS)
    common.add_argument("--delta", type=float, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="vslab", parents=[common],
                                description="Version spaces, complexity measures and bound validation.")
    sub = p.add_subparsers(dest="command", required=True)

    def klass(sp):
        sp.add_argument("--class", dest="cls", default="thresholds(5)")
        sp.add_argument("--dist", default="uniform", help="uniform, comma-separated masses, or file:path")
        sp.add_argument("--target", type=int, default=0, help="target hypothesis index")

    c = sub.add_parser("classes", parents=[common], help="list generators or show a class")
    c.add_argument("action", choices=["list", "show"])
    c.add_argument("spec", nargs="?")
    c.add_argument("--format", choices=["summary", "file"], default="summary")
    c.set_defaults(func=cmd_classes)

    m = sub.add_parser("measure", parents=[common], help="compute a complexity measure")
    m.add_argument("what", choices=["vc", "star", "nhat", "theta", "phi", "phic", "phihat", "doubling"])
    klass(m)
    m.add_argument("--cap", type=int, default=None)
    m.add_argument("--sample", default=None, help="labeled sample like p1:-1,p3:+1")
    m.add_argument("--m", type=int, default=16)
    m.add_argument("--mode", default="exact", help="exact|greedy for nhat, real|binary for phi")
    m.add_argument("--r0", default="0")
    m.add_argument("--c", default="16")
    m.add_argument("--eta", default="0")
    m.add_argument("--a", default="1")
    m.add_argument("--alpha", default="1")
    m.add_argument("--centers", default="all-labelings", choices=["all-labelings", "members"])
    m.add_argument("--budget", type=int, default=None, help="search budget for nhat and binary phi")
    m.set_defaults(func=cmd_measure)

    s = sub.add_parser("simulate", parents=[common], help="run a learner")
    s.add_argument("what", choices=["closure", "cal", "algorithm1", "monotone"])
    klass(s)
    s.add_argument("--m", type=int, default=64)
    s.add_argument("--budgets", default="0,1,2,4,8")
    s.add_argument("--nhat", action="store_true", help="track compression size per step")
    s.add_argument("--beta", default="0.1")
    s.add_argument("--a", default=None)
    s.add_argument("--alpha", default="1")
    s.add_argument("--c0", type=float, default=2.0)
    s.set_defaults(func=cmd_simulate)

    b = sub.add_parser("bound", parents=[common], help="evaluate a closed-form bound")
    b.add_argument("name", help=", ".join(sorted(BOUNDS)))
    b.add_argument("--param", action="append", metavar="k=v")
    b.set_defaults(func=cmd_bound)

    v = sub.add_parser("validate", parents=[common], help="Monte Carlo bound validation")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)

    lb = sub.add_parser("lowerbound", parents=[common], help="lower-bound constructions")
    lb.add_argument("kind", choices=["realizable", "noisy"])
    lb.add_argument("--class", dest="cls", default=None)
    lb.add_argument("--eps", default="1/64")
    lb.add_argument("--k", type=int, default=8)
    lb.add_argument("--zeta", default="1/8")
    lb.add_argument("--beta", default="0.25")
    lb.add_argument("--t", type=int, default=1)
    lb.add_argument("--m", default=None, help="comma-separated sample sizes")
    lb.set_defaults(func=cmd_lowerbound)
    return p


_DEFAULTS = {"seed": 0, "trials": 200, "delta": None, "out": None, "workers": None}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.explicit = {k for k in _DEFAULTS if hasattr(args, k)}
    for k, v in _DEFAULTS.items():
        if not hasattr(args, k):
            setattr(args, k, v)
    if getattr(args, "command", None) == "simulate":
        if args.delta is None:
            args.delta = 0.1
        if args.a is None:
            args.a = str(1 / (1 - 2 * to_fraction(args.beta)))
    try:
        return args.func(args)
    except VslabError as exc:
        print(f"vslab: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
