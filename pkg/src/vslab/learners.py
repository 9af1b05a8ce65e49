"""Learning rules: consistent monotone rules, Closure, CAL, ERM and the
subregion-based noisy learner (``run_algorithm1``)."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .complexity import Log, phi, phi_hat_noise, u_complexity
from .concept import ConceptClass, bits, is_intersection_closed, popcount, vc_dimension
from .errors import DomainError
from .noise import NoiseModel, sample_arrays
from .rng import as_generator, draw_points
from .version_space import (Distribution, LabeledSample, VersionSpaceView, consistent_members,
                            dis_of_masks, nhat, to_fraction, version_space)

RULES = ("closure_error_region", "dis_version_space")


def _target_mask(cls: ConceptClass, target: int) -> int:
    """Accept a hypothesis index and return its mask."""
    if not 0 <= target < len(cls):
        raise DomainError(f"target index {target} out of range")
    return cls.hypotheses[target]


# ----------------------------------------------------------------------------
# consistent monotone rules

@dataclass
class MonotoneRuleTrace:
    rule: str
    points: list[int]
    regions: list[int]
    masses: list[Fraction]
    consistent: list[bool]
    monotone: list[bool]
    nhat: list[int] | None = None

    @property
    def all_ok(self) -> bool:
        return all(self.consistent) and all(self.monotone)

    def to_csv(self) -> str:
        lines = ["step,mass,consistent,monotone" + (",nhat" if self.nhat is not None else "")]
        for t in range(len(self.regions)):
            row = [str(t + 1), repr(float(self.masses[t])), str(int(self.consistent[t])),
                   str(int(self.monotone[t]))]
            if self.nhat is not None:
                row.append(str(self.nhat[t]))
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"


def rule_region(rule: str, members: Sequence[int], target: int) -> int:
    """Region chosen by a monotone rule given the current version space masks."""
    if rule == "dis_version_space":
        return dis_of_masks(members)
    if rule == "closure_error_region":
        inter = -1
        for h in members:
            inter &= h
        return target & ~inter
    raise DomainError(f"unknown rule {rule!r}; choose from {RULES}")


def run_monotone_rule(rule: str, cls: ConceptClass, dist: Distribution, target: int, m: int,
                      seed=0, points: Sequence[int] | None = None, track_nhat: bool = False) -> MonotoneRuleTrace:
    """Run a region rule on m target-labeled i.i.d. draws, checking consistency and monotonicity."""
    f = _target_mask(cls, target)
    if rule == "closure_error_region" and not is_intersection_closed(cls):
        raise DomainError("closure_error_region needs an intersection-closed class")
    if rule not in RULES:
        raise DomainError(f"unknown rule {rule!r}; choose from {RULES}")
    if points is None:
        points = draw_points(dist, m, as_generator(seed)).tolist()
    points = list(points)[:m]
    H = cls.hypotheses
    members = list(H)
    pos = neg = seen = 0
    prev = None
    regions, masses, cons, mono, nh = [], [], [], [], []
    order: list[int] = []
    current_nhat = 0
    for x in points:
        new = not seen >> x & 1
        seen |= 1 << x
        if f >> x & 1:
            pos |= 1 << x
        else:
            neg |= 1 << x
        if new:
            members = [h for h in members if h & pos == pos and not h & neg]
            order.append(x)
            if track_nhat:
                current_nhat = nhat(cls, LabeledSample.from_target(order, f))
        region = rule_region(rule, members, f)
        regions.append(region)
        masses.append(dist.mass(region))
        cons.append(not region & seen)
        mono.append(prev is None or region & ~prev == 0)
        nh.append(current_nhat)
        prev = region
    return MonotoneRuleTrace(rule, points, regions, masses, cons, mono, nh if track_nhat else None)


def closure_predict(cls: ConceptClass, sample: LabeledSample) -> int:
    """Positive exactly where every consistent hypothesis is positive (returns a mask)."""
    if not is_intersection_closed(cls):
        raise DomainError("closure_predict needs an intersection-closed class")
    view = version_space(cls, sample)
    if not view:
        raise DomainError("empty version space")
    inter = -1
    for h in view.masks:
        inter &= h
    return inter & ((1 << cls.n) - 1)


# ----------------------------------------------------------------------------
# CAL

@dataclass
class CalRunRecord:
    budget: int
    labels: int
    samples: int
    hypothesis: int
    dis_trace: list[Fraction]      # P(DIS(V)) initially and after each label request
    queries: list[int]             # 1-based sample indices where a label was requested
    final_dis: Fraction
    final_error: Fraction
    fast_forwarded: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["dis_trace"] = [str(v) for v in self.dis_trace]
        d["final_dis"] = str(self.final_dis)
        d["final_error"] = str(self.final_error)
        return d


def run_cal(cls: ConceptClass, dist: Distribution, target: int, budget: int, seed=0,
            chunk: int = 4096, verify: bool = True) -> CalRunRecord:
    """Disagreement-based active learning with a label budget.

    Once the disagreement region has zero mass no further label can be
    requested, so the remaining draws up to 2^budget are skipped.
    """
    if budget < 0:
        raise DomainError("budget must be >= 0")
    f = _target_mask(cls, target)
    gen = as_generator(seed)
    H = cls.hypotheses
    members = (1 << len(H)) - 1
    pos = neg = 0
    t = m = 0
    limit = 1 << budget
    masks = list(H)
    dis = dis_of_masks(masks)
    trace = [dist.mass(dis)]
    queries: list[int] = []
    fast = False
    buf: list[int] = []
    while t < budget and m < limit:
        if dist.weight(dis) == 0:
            m = limit
            fast = True
            break
        if not buf:
            buf = draw_points(dist, min(chunk, limit - m), gen).tolist()[::-1]
        x = buf.pop()
        m += 1
        if dis >> x & 1:
            if f >> x & 1:
                pos |= 1 << x
            else:
                neg |= 1 << x
            t += 1
            queries.append(m)
            members = consistent_members(H, pos, neg)
            masks = [H[i] for i in bits(members)]
            if verify and not members >> target & 1:
                raise AssertionError("target left the version space")
            dis = dis_of_masks(masks)
            trace.append(dist.mass(dis))
    view = VersionSpaceView(cls, members)
    h = view.lowest()
    return CalRunRecord(budget, t, m, h, trace, queries, dist.mass(dis),
                        dist.mass(H[h] ^ f), fast)


# ----------------------------------------------------------------------------
# ERM

def mistake_counts(cls: ConceptClass, sample: LabeledSample | tuple, members: Sequence[int] | None = None) -> np.ndarray:
    """Number of sample mistakes per hypothesis (optionally only for ``members``)."""
    if isinstance(sample, LabeledSample):
        pts = np.array([x for x, _ in sample.pairs], dtype=np.int64)
        ys = np.array([y for _, y in sample.pairs], dtype=np.int64)
    else:
        pts, ys = sample
    n = cls.n
    pos = np.bincount(pts[ys == 1], minlength=n) if len(pts) else np.zeros(n, dtype=np.int64)
    neg = np.bincount(pts[ys == -1], minlength=n) if len(pts) else np.zeros(n, dtype=np.int64)
    idx = range(len(cls)) if members is None else members
    M = np.array([[cls.hypotheses[i] >> x & 1 for x in range(n)] for i in idx], dtype=np.int64)
    if M.size == 0:
        return np.zeros(0, dtype=np.int64)
    return M @ neg + (1 - M) @ pos


def erm_set(cls: ConceptClass, sample: LabeledSample) -> VersionSpaceView:
    counts = mistake_counts(cls, sample)
    best = counts.min()
    return VersionSpaceView(cls, sum(1 << i for i, c in enumerate(counts.tolist()) if c == best))


# ----------------------------------------------------------------------------
# subregion-based learner under noise

@dataclass
class Algo1Round:
    k: int
    eta: float
    delta: float
    region_mass: float
    d_size: int
    g_size: int
    u: float
    kept: int


@dataclass
class Algo1RunRecord:
    m: int
    rounds: list[Algo1Round]
    hypothesis: int
    final_members: int            # bitmask over hypothesis indices
    schedule: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"m": self.m, "hypothesis": self.hypothesis, "final_members": self.final_members,
                "rounds": [asdict(r) for r in self.rounds], "schedule": self.schedule}


def round_deltas(m: int, delta: float) -> list[float]:
    rounds = int(math.floor(math.log2(m)))
    return [delta / (math.log2(2 * m) - k) ** 2 for k in range(rounds)]


@dataclass(frozen=True)
class Algo1Schedule:
    """Tolerances for each round, fixed before any data is seen."""

    etas: tuple[Fraction, ...]
    deltas: tuple[float, ...]
    phi_hat_args: tuple[float, ...]
    c: int = 128


_PHI_HAT_CACHE: dict = {}


def algorithm1_schedule(cls: ConceptClass, dist: Distribution, m: int, delta: float, a, alpha,
                        c0: float, c: int = 128) -> Algo1Schedule:
    a_f, alpha_f = float(a), float(alpha)
    rounds = int(math.floor(math.log2(m)))
    deltas = round_deltas(m, delta)
    d = vc_dimension(cls)
    expo = alpha_f / (2 - alpha_f)
    c1 = (32 * c0) ** (2 * alpha_f / (2 - alpha_f))
    etas = [Fraction(2, c)]
    args = [math.nan]
    for k in range(1, rounds):
        r0 = a_f * (a_f * d * 2.0 ** (1 - k)) ** expo
        key = (cls, dist, to_fraction(a), to_fraction(alpha), Fraction(r0).limit_denominator(10 ** 12), c)
        if key not in _PHI_HAT_CACHE:
            _PHI_HAT_CACHE[key] = phi_hat_noise(cls, dist, a, alpha, key[4], c)
        ph = float(_PHI_HAT_CACHE[key])
        inner = a_f * 2.0 ** (1 - k) * (d * Log(ph) + Log(1 / deltas[k - 1]))
        r_k = a_f * c1 * inner ** expo
        eta = (2 / c) * (r_k / a_f) ** (1 / alpha_f)
        etas.append(Fraction(eta).limit_denominator(10 ** 12))
        args.append(r0)
    return Algo1Schedule(tuple(etas), tuple(deltas), tuple(args), c)


def run_algorithm1(cls: ConceptClass, dist: Distribution, noise: NoiseModel | int, m: int, delta, a, alpha,
                   c0, seed=0, schedule: Algo1Schedule | None = None, sample=None,
                   phi_cache: dict | None = None) -> Algo1RunRecord:
    """Round-based learner: each round restricts attention to the region where
    the binary subregion weighting is 1 and keeps hypotheses whose scaled
    excess mistakes on that round's fresh samples stay within tolerance."""
    delta, c0 = float(delta), float(c0)
    if m < 2:
        raise DomainError("m must be >= 2")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if to_fraction(a) < 1:
        raise DomainError("a must be >= 1")
    if not 0 < to_fraction(alpha) <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    if c0 <= 1:
        raise DomainError("c0 must be > 1")
    if schedule is None:
        schedule = algorithm1_schedule(cls, dist, m, delta, a, alpha, c0)
    if sample is None:
        pts, ys = sample_arrays(dist, noise, m, as_generator(seed))
    else:
        pts, ys = sample
    if phi_cache is None:
        phi_cache = {}
    H = cls.hypotheses
    G = list(range(len(H)))
    rounds = []
    for k, (eta, dk) in enumerate(zip(schedule.etas, schedule.deltas)):
        key = (tuple(G), eta)
        if key not in phi_cache:
            res = phi([H[i] for i in G], dist, eta, "binary")
            phi_cache[key] = sum(1 << x for x, g in enumerate(res.certificate.gamma) if g == 1)
        region = phi_cache[key]
        lo, hi = 1 << k, 1 << (k + 1)   # 1-based indices 2^k+1 .. 2^(k+1)
        bp, by = pts[lo:hi], ys[lo:hi]
        inside = np.array([region >> int(x) & 1 for x in bp], dtype=bool) if len(bp) else np.zeros(0, bool)
        dp, dy = bp[inside], by[inside]
        counts = mistake_counts(cls, (dp, dy), G)
        u = u_complexity([H[i] for i in G], 1 << k, dk, region, dist, c0, cls.n)
        tol = max(4 * float(eta), u)
        best = counts.min() if len(counts) else 0
        scale = 2.0 ** (-k)
        G_next = [i for i, cnt in zip(G, counts.tolist()) if scale * (cnt - best) <= tol]
        rounds.append(Algo1Round(k, float(eta), dk, float(dist.mass(region)), int(inside.sum()),
                                 len(G), u, len(G_next)))
        G = G_next
    final = sum(1 << i for i in G)
    sched = {"etas": [float(e) for e in schedule.etas], "deltas": list(schedule.deltas),
             "phi_hat_args": list(schedule.phi_hat_args), "c": schedule.c}
    return Algo1RunRecord(m, rounds, G[0], final, sched)
