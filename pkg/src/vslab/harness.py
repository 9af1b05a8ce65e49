"""Seeded Monte Carlo experiments and bound validation.

Every trial draws from its own stream ``rng.stream(master, index)``; results
are aggregated in trial order, so output is identical for any worker count.
"""
from __future__ import annotations

import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.stats import beta as beta_dist

from . import rng as rngmod
from .bounds import BOUNDS, evaluate_bound
from .complexity import phi_c
from .concept import ConceptClass, is_intersection_closed, make_class, star_number, vc_dimension
from .errors import DomainError, ParameterError, ValidationFailed
from .learners import erm_set, mistake_counts, run_cal
from .noise import LowerBoundScenario, error_rates, sample_arrays
from .version_space import (Distribution, LabeledSample, consistent_members, dis_of_masks, load_dist,
                            nhat as nhat_of)

QUANTITIES = ("sup_er", "pdis", "nhat", "closure_er")
CI_LEVEL = 0.99


# ----------------------------------------------------------------------------
# statistics

def clopper_pearson(k: int, n: int, level: float = CI_LEVEL) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval."""
    if n <= 0:
        return 0.0, 1.0
    a = 1 - level
    lo = 0.0 if k == 0 else float(beta_dist.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(beta_dist.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


# ----------------------------------------------------------------------------
# configuration

def make_dist(spec, n: int) -> Distribution:
    if spec is None or spec == "uniform":
        return Distribution.uniform(n)
    if isinstance(spec, str):
        path = spec.split(":", 1)[1] if spec.startswith("file:") else spec
        d = load_dist(path)
    else:
        d = Distribution.from_masses(spec)
    if d.n != n:
        raise ParameterError(f"distribution has {d.n} points but the class has {n}")
    return d


@dataclass
class ExperimentConfig:
    cls: str
    m_grid: list[int]
    dist: object = "uniform"
    target: int = 0
    delta: float = 0.1
    trials: int = 2000
    seed: int = 0
    quantities: list[str] = field(default_factory=lambda: ["sup_er", "pdis"])
    bounds: list[dict] = field(default_factory=list)
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ParameterError("field 'trials' must be >= 1")
        if not 0 < self.delta < 1:
            raise ParameterError("field 'delta' must lie in (0, 1)")
        if not self.m_grid or any(int(m) < 1 for m in self.m_grid):
            raise ParameterError("field 'm_grid' must be a nonempty list of positive integers")
        self.m_grid = sorted({int(m) for m in self.m_grid})
        for q in self.quantities:
            if q not in QUANTITIES:
                raise ParameterError(f"unknown quantity {q!r}; known: {', '.join(QUANTITIES)}")
        for b in self.bounds:
            if "name" not in b or "quantity" not in b:
                raise ParameterError("each bound needs 'name' and 'quantity'")
            if b["quantity"] not in self.quantities:
                raise ParameterError(f"bound {b['name']!r} compares quantity {b['quantity']!r}, which is not measured")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "class" in d:
            d["cls"] = d.pop("class")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(d) - known)
        if unknown:
            raise ParameterError(f"unknown config field {unknown[0]!r}")
        if "cls" not in d or "m_grid" not in d:
            raise ParameterError("config needs 'class' and 'm_grid'")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except json.JSONDecodeError as exc:
            raise ParameterError(f"config is not valid JSON: {exc}") from None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class"] = d.pop("cls")
        return d


@dataclass(frozen=True)
class Context:
    cls: ConceptClass
    dist: Distribution
    target: int
    d: int
    s: int

    @property
    def target_mask(self) -> int:
        return self.cls.hypotheses[self.target]


@lru_cache(maxsize=32)
def _context(cls_spec: str, dist_key: str, target: int) -> Context:
    c = make_class(cls_spec)
    dist = make_dist(json.loads(dist_key), c.n)
    if not 0 <= target < len(c):
        raise ParameterError(f"target index {target} out of range for {c.name}")
    s = star_number(c)
    return Context(c, dist, target, vc_dimension(c), s)


def context_for(cfg: ExperimentConfig) -> Context:
    return _context(cfg.cls, json.dumps(cfg.dist), cfg.target)


# ----------------------------------------------------------------------------
# trials

@dataclass
class TrialRecord:
    index: int
    seed: int
    values: dict  # m -> {quantity: Fraction | int}


def measure_prefixes(ctx: Context, points: Sequence[int], m_grid: Sequence[int],
                     quantities: Sequence[str]) -> dict:
    """Quantities of the target-labeled prefix at each m in ``m_grid``.

    Version spaces only change when a new point appears, so the work is
    proportional to the number of distinct points, not to m.
    """
    cls, dist, f = ctx.cls, ctx.dist, ctx.target_mask
    H = cls.hypotheses
    want = set(quantities)
    members = list(H)
    pos = neg = seen = 0
    order: list[int] = []
    running_nhat = 0
    state = {}
    out = {}
    grid = sorted(m_grid)
    gi = 0

    def snapshot():
        vals = {}
        if "sup_er" in want:
            vals["sup_er"] = Fraction(max(dist.weight(h ^ f) for h in members), dist.denominator)
        if "pdis" in want:
            vals["pdis"] = dist.mass(dis_of_masks(members))
        if "closure_er" in want:
            inter = -1
            for h in members:
                inter &= h
            vals["closure_er"] = dist.mass((inter & ((1 << cls.n) - 1)) ^ f)
        if "nhat" in want:
            vals["nhat"] = running_nhat
        return vals

    dirty = True
    for t, x in enumerate(points, start=1):
        if not seen >> x & 1:
            seen |= 1 << x
            if f >> x & 1:
                pos |= 1 << x
            else:
                neg |= 1 << x
            members = [h for h in members if h & pos == pos and not h & neg]
            order.append(x)
            if "nhat" in want:
                running_nhat = max(running_nhat, nhat_of(cls, LabeledSample.from_target(order, f)))
            dirty = True
        while gi < len(grid) and grid[gi] == t:
            if dirty:
                state = snapshot()
                dirty = False
            out[t] = dict(state)
            gi += 1
        if gi == len(grid):
            break
    return out


def _run_trial(args) -> TrialRecord:
    cfg_dict, index = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    ctx = context_for(cfg)
    seed = rngmod.derive_seed(cfg.seed, index)
    gen = rngmod.stream(cfg.seed, index)
    pts = rngmod.draw_points(ctx.dist, max(cfg.m_grid), gen).tolist()
    return TrialRecord(index, seed, measure_prefixes(ctx, pts, cfg.m_grid, cfg.quantities))


def run_trials(cfg: ExperimentConfig, workers: int | None = None) -> list[TrialRecord]:
    workers = cfg.workers if workers is None else workers
    jobs = [(cfg.to_dict(), i) for i in range(cfg.trials)]
    if workers <= 1:
        return [_run_trial(j) for j in jobs]
    chunk = max(1, len(jobs) // (workers * 8))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run_trial, jobs, chunksize=chunk))


# ----------------------------------------------------------------------------
# validation

@dataclass
class BoundCheck:
    bound: str
    form: str
    quantity: str
    m: int
    bound_value: float          # mean over trials for data-dependent bounds
    bound_max: float
    violations: int
    trials: int
    ci_low: float
    ci_high: float
    mean: float
    std: float
    verdict: str


@dataclass
class ValidationReport:
    config: dict
    rng: str
    checks: list[BoundCheck]

    @property
    def passed(self) -> bool:
        return all(c.verdict.startswith("PASS") for c in self.checks)

    def to_json(self) -> str:
        return json.dumps({"config": self.config, "rng": self.rng, "passed": self.passed,
                           "checks": [asdict(c) for c in self.checks]}, sort_keys=True, indent=1)


def _resolve_params(entry: dict, ctx: Context, cfg: ExperimentConfig, m: int, values: dict,
                    phi_cache: dict) -> dict:
    name = entry["name"]
    base = name[: -len("_expectation")] if name.endswith("_expectation") else name
    if base not in BOUNDS:
        raise ParameterError(f"unknown bound {name!r}")
    form = "expectation" if name.endswith("_expectation") else entry.get("form", "quantile")
    spec = BOUNDS[base]
    required = spec.params if form == "quantile" else spec.expectation_params
    p = dict(entry.get("params", {}))
    auto = {"m": m, "delta": cfg.delta, "d": ctx.d, "vc": ctx.d, "s": ctx.s}
    for k in required:
        if k in p:
            continue
        if k in auto:
            p[k] = auto[k]
        elif k == "nhat":
            if "nhat" not in values:
                raise ParameterError(f"bound {name!r} needs the 'nhat' quantity to be measured")
            p[k] = values["nhat"]
        elif k == "phi":
            c = Fraction(entry.get("c", 16))
            key = (m, c)
            if key not in phi_cache:
                r0 = Fraction(ctx.d, m)
                phi_cache[key] = phi_c(ctx.cls, ctx.dist, ctx.target_mask, r0, c) if r0 < 1 else Fraction(1)
            p[k] = phi_cache[key]
        else:
            raise ParameterError(f"bound {name!r} needs field {k!r} in its params")
    p["form"] = form
    return p


def validate(cfg: ExperimentConfig, records: Sequence[TrialRecord]) -> tuple[ValidationReport, str]:
    """Compare measured quantities to each configured bound; returns (report, csv)."""
    ctx = context_for(cfg)
    phi_cache: dict = {}
    T = len(records)
    # per (bound index, m): list of (bound value, measured)
    table: dict = {}
    for rec in records:
        for m in cfg.m_grid:
            vals = rec.values[m]
            for bi, entry in enumerate(cfg.bounds):
                p = _resolve_params(entry, ctx, cfg, m, vals, phi_cache)
                res = evaluate_bound(entry["name"], p)
                table.setdefault((bi, m), []).append((res.value, vals[entry["quantity"]], res.form))
    checks = []
    for bi, entry in enumerate(cfg.bounds):
        for m in cfg.m_grid:
            rows = table[(bi, m)]
            form = rows[0][2]
            bvals = np.array([r[0] for r in rows])
            meas = np.array([float(r[1]) for r in rows])
            viol = int(sum(1 for bv, q, _ in rows if q > bv))
            lo, hi = clopper_pearson(viol, T)
            mean = float(meas.mean())
            std = float(meas.std(ddof=1)) if T > 1 else 0.0
            if form == "quantile":
                verdict = "PASS-quantile" if lo <= cfg.delta else "FAIL-quantile"
            else:
                verdict = "PASS-mean" if mean <= float(bvals.mean()) + 3 * std / math.sqrt(T) else "FAIL-mean"
            checks.append(BoundCheck(entry["name"], form, entry["quantity"], m, float(bvals.mean()),
                                     float(bvals.max()), viol, T, lo, hi, mean, std, verdict))
    report = ValidationReport(cfg.to_dict(), rngmod.ALGORITHM, checks)
    return report, trials_csv(cfg, records, table)


def trials_csv(cfg: ExperimentConfig, records: Sequence[TrialRecord], table: dict) -> str:
    buf = io.StringIO()
    buf.write("# vslab validate\n")
    buf.write(f"# rng: {rngmod.ALGORITHM}\n")
    # worker count and output path do not affect results, so they stay out of the header
    settings = {k: v for k, v in cfg.to_dict().items() if k not in ("workers", "output")}
    buf.write(f"# config: {json.dumps(settings, sort_keys=True)}\n")
    cols = ["trial", "seed", "m"] + list(cfg.quantities)
    for bi, entry in enumerate(cfg.bounds):
        cols += [f"bound{bi}_{entry['name']}", f"violated{bi}"]
    buf.write(",".join(cols) + "\n")
    for ti, rec in enumerate(records):
        for m in cfg.m_grid:
            vals = rec.values[m]
            row = [str(rec.index), str(rec.seed), str(m)]
            row += [_fmt(vals[q]) for q in cfg.quantities]
            for bi in range(len(cfg.bounds)):
                bv, q, _ = table[(bi, m)][ti]
                row += [repr(bv), str(int(q > bv))]
            buf.write(",".join(row) + "\n")
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return str(v)


def run_validation(cfg: ExperimentConfig, workers: int | None = None, out: str | None = None,
                   raise_on_fail: bool = False) -> ValidationReport:
    records = run_trials(cfg, workers)
    report, csv = validate(cfg, records)
    path = out or cfg.output
    if path:
        Path(path).write_text(csv)
        Path(str(path) + ".report.json").write_text(report.to_json() + "\n")
    if raise_on_fail and not report.passed:
        raise ValidationFailed("at least one bound check failed")
    return report


# ----------------------------------------------------------------------------
# estimators

def _points(ctx_dist, m, gen):
    return rngmod.draw_points(ctx_dist, m, gen).tolist()


def hitting_time(cls: ConceptClass, dist: Distribution, target: int, eps: Fraction,
                 gen: np.random.Generator, m_max: int, chunk: int = 1024) -> float:
    """Smallest m >= 1 with sup over the version space of er <= eps (inf if > m_max)."""
    f = cls.hypotheses[target]
    lim = eps * dist.denominator
    members = list(cls.hypotheses)
    pos = neg = seen = 0
    m = 0
    while m < m_max:
        pts = _points(dist, min(chunk, m_max - m), gen)
        for x in pts:
            m += 1
            if not seen >> x & 1:
                seen |= 1 << x
                if f >> x & 1:
                    pos |= 1 << x
                else:
                    neg |= 1 << x
                members = [h for h in members if h & pos == pos and not h & neg]
            if max(dist.weight(h ^ f) for h in members) <= lim:
                return m
    return math.inf


@dataclass
class MEstimate:
    estimate: float
    eps: float
    delta: float
    trials: int
    coverage: float
    ci_low: float
    ci_high: float
    hitting_times: list


def estimate_M(cls: ConceptClass, dist: Distribution, target: int, eps, delta: float, trials: int,
               seed: int = 0, m_max: int = 10 ** 6) -> MEstimate:
    """Empirical smallest m with P(sup er over V_m <= eps) >= 1 - delta/2."""
    eps = Fraction(eps).limit_denominator(10 ** 12) if isinstance(eps, float) else Fraction(eps)
    if not 0 < eps <= 1:
        raise DomainError("eps must lie in (0, 1]")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    times = [hitting_time(cls, dist, target, eps, rngmod.stream(seed, i), m_max) for i in range(trials)]
    goal = 1 - delta / 2

    def ok(m):
        return sum(1 for t in times if t <= m) >= goal * trials

    if not ok(m_max):
        k = sum(1 for t in times if t <= m_max)
        lo, hi = clopper_pearson(k, trials)
        return MEstimate(math.inf, float(eps), delta, trials, k / trials, lo, hi, times)
    lo_m, hi_m = 1, m_max
    while lo_m < hi_m:
        mid = (lo_m + hi_m) // 2
        if ok(mid):
            hi_m = mid
        else:
            lo_m = mid + 1
    k = sum(1 for t in times if t <= lo_m)
    ci = clopper_pearson(k, trials)
    return MEstimate(lo_m, float(eps), delta, trials, k / trials, ci[0], ci[1], times)


@dataclass
class NhatQuantile:
    estimate: int
    m: int
    delta: float
    values: list[int]


def quantile_nhat(cls: ConceptClass, dist: Distribution, target: int, m: int, delta: float,
                  trials: int, seed: int = 0) -> NhatQuantile:
    """Empirical (1 - delta)-quantile of the running-max compression size at m."""
    ctx = Context(cls, dist, target, 0, 0)
    vals = []
    for i in range(trials):
        pts = _points(dist, m, rngmod.stream(seed, i))
        vals.append(measure_prefixes(ctx, pts, [m], ["nhat"])[m]["nhat"])
    need = (1 - delta) * trials
    for b in range(0, m + 1):
        if sum(1 for v in vals if v <= b) >= need:
            return NhatQuantile(b, m, delta, vals)
    return NhatQuantile(m, m, delta, vals)


def cal_curve(cls: ConceptClass, dist: Distribution, target: int, budgets: Sequence[int], trials: int,
              seed: int = 0) -> str:
    """CSV of mean labels, final error, final disagreement mass and coverage per budget."""
    buf = io.StringIO()
    buf.write(f"# vslab cal_curve rng={rngmod.ALGORITHM} seed={seed} class={cls.name}\n")
    buf.write("budget,trials,labels,error,error_se,dis,coverage\n")
    for n in budgets:
        labels, errs, dis = [], [], []
        for i in range(trials):
            rec = run_cal(cls, dist, target, int(n), rngmod.stream(seed, i))
            labels.append(rec.labels)
            errs.append(rec.final_error)
            dis.append(rec.final_dis)
        mean_dis = sum(dis, Fraction(0)) / trials
        mean_err = sum(errs, Fraction(0)) / trials
        se = float(np.std([float(e) for e in errs], ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
        buf.write(",".join([str(n), str(trials), repr(sum(labels) / trials), repr(float(mean_err)),
                            repr(se), repr(float(mean_dis)), repr(float(1 - mean_dis))]) + "\n")
    return buf.getvalue()


# ----------------------------------------------------------------------------
# lower-bound experiments

@dataclass
class LowerBoundRow:
    m: int
    hits: int
    trials: int
    frequency: float
    ci_low: float
    ci_high: float
    in_regime: bool | None
    verdict: str


def run_lower_bound(scenario: LowerBoundScenario, m_grid: Sequence[int], trials: int, seed: int = 0,
                    delta: float = 1 / 24) -> list[LowerBoundRow]:
    """Frequency of the scenario's failure event at each m.

    Realizable: sup over the version space of er >= eps; PASS needs the 99% CI
    to sit above 1/2 inside the regime.  Noisy: the lowest-index empirical risk
    minimizer has excess error >= threshold; PASS needs frequency > delta.
    """
    cls, dist = scenario.cls, scenario.dist
    grid = sorted({int(m) for m in m_grid})
    hits = {m: 0 for m in grid}
    if scenario.kind == "realizable_star":
        ctx = Context(cls, dist, scenario.target, 0, 0)
        for i in range(trials):
            pts = _points(dist, grid[-1], rngmod.stream(seed, i))
            vals = measure_prefixes(ctx, pts, grid, ["sup_er"])
            for m in grid:
                if vals[m]["sup_er"] >= scenario.threshold:
                    hits[m] += 1
    elif scenario.kind == "noisy_star":
        er = error_rates(cls, dist, scenario.noise)
        best = min(er)
        for i in range(trials):
            pts, ys = sample_arrays(dist, scenario.noise, grid[-1], rngmod.stream(seed, i))
            for m in grid:
                counts = mistake_counts(cls, (pts[:m], ys[:m]))
                h = int(np.argmin(counts))
                if er[h] - best >= scenario.threshold:
                    hits[m] += 1
    else:
        raise DomainError(f"unknown scenario kind {scenario.kind!r}")
    rows = []
    for m in grid:
        k = hits[m]
        lo, hi = clopper_pearson(k, trials)
        freq = k / trials
        if scenario.kind == "realizable_star":
            regime = m < scenario.regime_bound
            if regime:
                verdict = "PASS" if lo > 0.5 else "FAIL"
            else:
                verdict = "INFO"
        else:
            regime = None
            verdict = "PASS" if freq > delta else "FAIL"
        rows.append(LowerBoundRow(m, k, trials, freq, lo, hi, regime, verdict))
    return rows
