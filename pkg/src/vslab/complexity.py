"""Distribution-dependent complexity measures over a finite instance space.

Everything is exact: masses are rationals and the subregion measure is a
linear program solved in rational arithmetic.  Suprema over a radius are taken
over the finite set of ball breakpoints plus the right limit at the lower
end, since balls are piecewise constant in the radius.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .concept import ConceptClass, bits, popcount, vc_dimension
from .errors import BudgetExceeded, CapacityError, DomainError
from .lp import Infeasible, maximize
from .version_space import Distribution, VersionSpaceView, dis_of_masks, to_fraction

BINARY_NODE_BUDGET = 10 ** 6
COVER_NODE_BUDGET = 10 ** 6
ALL_LABELINGS_CAP = 20


@dataclass(frozen=True)
class WeightingCertificate:
    gamma: tuple[Fraction, ...]
    zeta: tuple[Fraction, ...]
    xi: tuple[Fraction, ...]

    def to_json(self) -> str:
        def enc(v):
            return [[f.numerator, f.denominator] for f in v]

        return json.dumps({"gamma": enc(self.gamma), "zeta": enc(self.zeta), "xi": enc(self.xi)},
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "WeightingCertificate":
        d = json.loads(text)

        def dec(v):
            return tuple(Fraction(a, b) for a, b in v)

        return cls(dec(d["gamma"]), dec(d["zeta"]), dec(d["xi"]))


@dataclass(frozen=True)
class PhiResult:
    value: Fraction
    certificate: WeightingCertificate
    mode: str
    nodes: int = 0


def certificate_value(masks: Sequence[int], dist: Distribution, eta, cert: WeightingCertificate,
                      binary: bool = False) -> Fraction:
    """Check every constraint exactly and return E[gamma]; raises on violation."""
    eta = to_fraction(eta)
    n = dist.n
    for x in range(n):
        g, z, s = cert.gamma[x], cert.zeta[x], cert.xi[x]
        if min(g, z, s) < 0 or max(g, z, s) > 1 or g + z + s != 1:
            raise DomainError(f"certificate violates the simplex constraint at point {x}")
        if binary and g not in (0, 1):
            raise DomainError(f"certificate gamma is not binary at point {x}")
    m = dist.masses
    for h in masks:
        load = sum(m[x] * (cert.zeta[x] if h >> x & 1 else cert.xi[x]) for x in range(n))
        if load > eta:
            raise DomainError("certificate violates a hypothesis constraint")
    return sum((m[x] * cert.gamma[x] for x in range(n)), Fraction(0))


class _PhiProblem:
    """The subregion LP restricted to disagreement points with positive mass.

    Off those points the optimum is known in closed form: agreed points get
    all weight on the label nobody predicts, and zero-mass points cost
    nothing either way.
    """

    def __init__(self, masks: Sequence[int], dist: Distribution, eta: Fraction):
        if not masks:
            raise DomainError("phi of an empty set of hypotheses")
        if eta < 0:
            raise DomainError("eta must be >= 0")
        self.masks = masks
        self.dist = dist
        self.eta = eta
        dis = dis_of_masks(masks)
        self.points = bits(dis & dist.support_mask)
        self.agree = dist.support_mask & ~dis
        self.w = [dist.weights[x] for x in self.points]
        self.Q = dist.denominator
        rows = []
        seen = set()
        for h in masks:
            key = tuple(h >> x & 1 for x in self.points)
            if key not in seen:
                seen.add(key)
                rows.append(key)
        self.rows = rows
        self.total = sum(self.w)
        self.cap = eta * self.Q

    def solve(self, fixed: dict[int, int] | None = None):
        """Max covered weight with gamma fixed on some points (index into points).

        Returns (value, gamma list) or None if infeasible.
        """
        fixed = fixed or {}
        free = [i for i in range(len(self.points)) if i not in fixed]
        zero = [i for i in range(len(self.points)) if fixed.get(i) == 0]
        # variables: zeta, xi for free points; zeta for gamma=0 points (xi = 1 - zeta)
        col = {}
        for i in free:
            col[("z", i)] = len(col)
            col[("x", i)] = len(col)
        for i in zero:
            col[("z", i)] = len(col)
        nv = len(col)
        c = [Fraction(0)] * nv
        for i in free:
            c[col[("z", i)]] = c[col[("x", i)]] = Fraction(self.w[i])
        A, b = [], []
        for key in self.rows:
            row = [0] * nv
            bound = self.cap
            for i in free:
                row[col[("z", i)] if key[i] else col[("x", i)]] = self.w[i]
            for i in zero:
                if key[i]:
                    row[col[("z", i)]] = self.w[i]
                else:
                    row[col[("z", i)]] = -self.w[i]
                    bound -= self.w[i]
            A.append(row)
            b.append(bound)
        for i in free:
            row = [0] * nv
            row[col[("z", i)]] = row[col[("x", i)]] = 1
            A.append(row)
            b.append(1)
        for i in zero:
            row = [0] * nv
            row[col[("z", i)]] = 1
            A.append(row)
            b.append(1)
        if nv == 0:
            if any(bb < 0 for bb in b):
                return None
            sol_x = ()
            value = Fraction(0)
        else:
            try:
                sol = maximize(c, A, b)
            except Infeasible:
                return None
            sol_x, value = sol.x, sol.value
        zeta = [Fraction(0)] * len(self.points)
        xi = [Fraction(0)] * len(self.points)
        for i in free:
            zeta[i] = sol_x[col[("z", i)]]
            xi[i] = sol_x[col[("x", i)]]
        for i in zero:
            zeta[i] = sol_x[col[("z", i)]]
            xi[i] = 1 - zeta[i]
            value += self.w[i]
        return value, zeta, xi

    def certificate(self, zeta, xi) -> WeightingCertificate:
        n = self.dist.n
        g = [Fraction(1)] * n
        z = [Fraction(0)] * n
        s = [Fraction(0)] * n
        common = self.masks[0]
        for x in bits(self.agree):
            g[x] = Fraction(0)
            if common >> x & 1:
                s[x] = Fraction(1)
            else:
                z[x] = Fraction(1)
        for i, x in enumerate(self.points):
            z[x], s[x] = zeta[i], xi[i]
            g[x] = 1 - zeta[i] - xi[i]
        return WeightingCertificate(tuple(g), tuple(z), tuple(s))

    def value_of(self, covered) -> Fraction:
        return Fraction(self.total - covered, self.Q) if not isinstance(covered, Fraction) \
            else (self.total - covered) / self.Q


def phi(view: VersionSpaceView | Sequence[int], dist: Distribution, eta, mode: str = "real",
        budget: int = BINARY_NODE_BUDGET) -> PhiResult:
    """Exact subregion measure of a set of hypotheses at tolerance ``eta``.

    ``mode='binary'`` restricts gamma to {0,1} and solves by branch and bound
    with the real relaxation as the bound.
    """
    masks = view.masks if isinstance(view, VersionSpaceView) else tuple(view)
    eta = to_fraction(eta)
    prob = _PhiProblem(masks, dist, eta)
    if mode == "real":
        covered, zeta, xi = prob.solve()
        return PhiResult(prob.value_of(covered), prob.certificate(zeta, xi), "real")
    if mode != "binary":
        raise DomainError(f"unknown phi mode {mode!r}")
    return _phi_binary(prob, budget)


def _phi_binary(prob: _PhiProblem, budget: int) -> PhiResult:
    k = len(prob.points)
    # incumbent: gamma = 1 everywhere, or the rounding of the half-tolerance optimum
    best_cov = Fraction(0)
    best = ([Fraction(0)] * k, [Fraction(0)] * k)
    half = _PhiProblem(prob.masks, prob.dist, prob.eta / 2).solve()
    if half is not None:
        _, hz, hx = half
        rz, rx, cov = [], [], Fraction(0)
        for i in range(k):
            s = hz[i] + hx[i]
            if s * 2 >= 1:
                rz.append(hz[i] / s)
                rx.append(hx[i] / s)
                cov += prob.w[i]
            else:
                rz.append(Fraction(0))
                rx.append(Fraction(0))
        if cov > best_cov and _feasible(prob, rz, rx):
            best_cov, best = cov, (rz, rx)
    nodes = 0
    stack = [dict()]
    while stack:
        fixed = stack.pop()
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"binary phi branch and bound exceeded {budget} nodes")
        res = prob.solve(fixed)
        if res is None:
            continue
        cov, zeta, xi = res
        if cov <= best_cov:
            continue
        frac = next((i for i in range(k) if i not in fixed and 0 < zeta[i] + xi[i] < 1), None)
        if frac is None:
            # gamma already integral at every free point
            best_cov, best = cov, (zeta, xi)
            continue
        one = dict(fixed)
        one[frac] = 1
        zero = dict(fixed)
        zero[frac] = 0
        # depth first, gamma = 0 explored first
        stack.append(one)
        stack.append(zero)
    zeta, xi = best
    return PhiResult(prob.value_of(best_cov), prob.certificate(zeta, xi), "binary", nodes)


def _feasible(prob: _PhiProblem, zeta, xi) -> bool:
    for key in prob.rows:
        load = sum(prob.w[i] * (zeta[i] if key[i] else xi[i]) for i in range(len(prob.points)))
        if load > prob.cap:
            return False
    return True


# ----------------------------------------------------------------------------
# balls and radius suprema

def distances(cls: ConceptClass, center: int, dist: Distribution) -> list[int]:
    """Integer distances (in units of 1/denominator) from ``center`` to every hypothesis."""
    return [dist.weight(h ^ center) for h in cls.hypotheses]


@dataclass(frozen=True)
class RadiusProfile:
    radii: tuple[Fraction, ...]
    balls: tuple[int, ...]  # member bitmask of the closed ball at each radius


def radius_profile(cls: ConceptClass, center: int, dist: Distribution) -> RadiusProfile:
    d = distances(cls, center, dist)
    levels = sorted(set(d))
    balls = []
    for lv in levels:
        balls.append(sum(1 << i for i, v in enumerate(d) if v <= lv))
    return RadiusProfile(tuple(Fraction(v, dist.denominator) for v in levels), tuple(balls))


def ball(cls: ConceptClass, center: int, r, dist: Distribution) -> VersionSpaceView:
    r = to_fraction(r)
    lim = r * dist.denominator
    return VersionSpaceView(cls, sum(1 << i for i, v in enumerate(distances(cls, center, dist)) if v <= lim))


def _candidate_radii(cls, center, dist, r0: Fraction):
    """(radius, ball view) pairs covering the sup over r in (r0, 1]: the right
    limit at r0 first, then every breakpoint above r0."""
    prof = radius_profile(cls, center, dist)
    out = [(r0, ball(cls, center, r0, dist))]
    for rho, members in zip(prof.radii, prof.balls):
        if r0 < rho <= 1:
            out.append((rho, VersionSpaceView(cls, members)))
    return out


def _ratio(num: Fraction, den: Fraction) -> Fraction:
    # 0/0 = 0 (the right limit at zero of a vanishing numerator); x/0 = inf otherwise
    if den == 0:
        if num == 0:
            return Fraction(0)
        return math.inf
    return num / den


def _check_target(cls: ConceptClass, target: int) -> None:
    if target not in cls:
        raise DomainError("target must belong to the class")


def disagreement_coefficient(cls: ConceptClass, dist: Distribution, target: int, r0) -> Fraction:
    """theta(r0) = sup_{r > r0} P(DIS(B(target, r)))/r, floored at 1."""
    _check_target(cls, target)
    r0 = to_fraction(r0)
    if r0 < 0:
        raise DomainError("r0 must be >= 0")
    best = Fraction(1)
    for rho, view in _candidate_radii(cls, target, dist, r0):
        val = _ratio(dist.mass(dis_of_masks(view.masks)), rho)
        best = max(best, val)
    return best


def phi_c(cls: ConceptClass, dist: Distribution, target: int, r0, c) -> Fraction:
    """phi_c(r0) = sup_{r0 < r <= 1} Phi(B(target, r), r/c)/r, floored at 1."""
    _check_target(cls, target)
    r0, c = to_fraction(r0), to_fraction(c)
    if c <= 1:
        raise DomainError("c must be > 1")
    if not 0 <= r0 < 1:
        raise DomainError("r0 must lie in [0, 1)")
    return _sup_phi(cls, dist, target, r0, lambda r: r / c)


def _sup_phi(cls, dist, center, r0, eta_of, cache=None) -> Fraction:
    best = Fraction(1)
    for rho, view in _candidate_radii(cls, center, dist, r0):
        if rho == 0:
            continue  # the ball at radius 0 has no disagreement mass, so the ratio limit is 0
        key = (view.members, rho)
        if cache is not None and key in cache:
            val = cache[key]
        else:
            val = phi(view, dist, eta_of(rho)).value / rho
            if cache is not None:
                cache[key] = val
        best = max(best, val)
    return best


def phi_hat_noise(cls: ConceptClass, dist: Distribution, a, alpha, r0, c=128) -> Fraction:
    """sup over centers h and r > r0 of Phi(B(h, r), (r/a)^(1/alpha)/c)/r, floored at 1.

    Exact when alpha = 1; otherwise the tolerance is the nearest rational to
    the float power.
    """
    a, alpha, r0, c = to_fraction(a), to_fraction(alpha), to_fraction(r0), to_fraction(c)
    if a < 1:
        raise DomainError("a must be >= 1")
    if not 0 < alpha <= 1:
        raise DomainError("alpha must lie in (0, 1]")
    if c <= 1:
        raise DomainError("c must be > 1")
    if r0 < 0:
        raise DomainError("r0 must be >= 0")
    if r0 >= 1:
        return Fraction(1)

    def eta_of(r: Fraction) -> Fraction:
        if alpha == 1:
            return r / a / c
        return Fraction(float(r / a) ** (1 / float(alpha))).limit_denominator(10 ** 12) / c

    best = Fraction(1)
    for h in cls.hypotheses:
        best = max(best, _sup_phi(cls, dist, h, r0, eta_of))
    return best


# ----------------------------------------------------------------------------
# covering, packing, doubling

@dataclass(frozen=True)
class CoverResult:
    size: int
    centers: tuple[int, ...]  # positive-set masks of the chosen centers
    exact: bool
    center_pool: str


def _distinct_members(masks, dist):
    support = dist.support_mask
    seen = {}
    for h in masks:
        seen.setdefault(h & support, h)
    return list(seen.values())


def covering_number(view: VersionSpaceView | Sequence[int], dist: Distribution, radius,
                    mode: str = "exact", centers: str = "all-labelings",
                    budget: int = COVER_NODE_BUDGET) -> CoverResult:
    """Fewest centers whose closed ``radius``-balls cover the view."""
    masks = view.masks if isinstance(view, VersionSpaceView) else tuple(view)
    if not masks:
        raise DomainError("covering an empty view")
    radius = to_fraction(radius)
    if radius < 0:
        raise DomainError("radius must be >= 0")
    members = _distinct_members(masks, dist)
    lim = radius * dist.denominator
    if centers == "members":
        pool = list(members)
    elif centers == "all-labelings":
        dis = dis_of_masks(members) & dist.support_mask
        pts = bits(dis)
        if len(pts) > ALL_LABELINGS_CAP:
            raise CapacityError(f"all-labelings centers need |DIS| <= {ALL_LABELINGS_CAP} (got {len(pts)})")
        base = members[0] & ~dis
        pool = []
        for combo in range(1 << len(pts)):
            m = base
            for j, x in enumerate(pts):
                if combo >> j & 1:
                    m |= 1 << x
            pool.append(m)
    else:
        raise DomainError(f"unknown centers option {centers!r}")
    cover_sets = {}
    for cmask in pool:
        s = 0
        for i, h in enumerate(members):
            if dist.weight(h ^ cmask) <= lim:
                s |= 1 << i
        if s and s not in cover_sets:
            cover_sets[s] = cmask
    # drop candidates dominated by another candidate
    sets = sorted(cover_sets, key=lambda s: (-popcount(s), s))
    kept: list[int] = []
    for s in sets:
        if not any(s & t == s for t in kept):
            kept.append(s)
    universe = (1 << len(members)) - 1
    greedy = _greedy_cover(kept, universe)
    if mode == "greedy":
        return CoverResult(len(greedy), tuple(cover_sets[s] for s in greedy), False, centers)
    if mode != "exact":
        raise DomainError(f"unknown mode {mode!r}")
    best = _exact_cover(kept, universe, greedy, budget)
    return CoverResult(len(best), tuple(cover_sets[s] for s in best), True, centers)


def _greedy_cover(sets, universe):
    chosen, covered = [], 0
    while covered != universe:
        s = max(sets, key=lambda t: popcount(t & ~covered))
        chosen.append(s)
        covered |= s
    return chosen


def _exact_cover(sets, universe, incumbent, budget):
    best = list(incumbent)
    biggest = max(popcount(s) for s in sets)
    nodes = 0

    def rec(covered, chosen):
        nonlocal best, nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"exact covering search exceeded {budget} nodes")
        if covered == universe:
            if len(chosen) < len(best):
                best = list(chosen)
            return
        left = popcount(universe & ~covered)
        if len(chosen) + -(-left // biggest) >= len(best):
            return
        # branch on the uncovered element with the fewest covering sets
        el, opts = None, None
        for e in bits(universe & ~covered):
            cand = [s for s in sets if s >> e & 1]
            if opts is None or len(cand) < len(opts):
                el, opts = e, cand
        opts.sort(key=lambda s: -popcount(s & ~covered))
        for s in opts:
            chosen.append(s)
            rec(covered | s, chosen)
            chosen.pop()

    rec(0, [])
    return best


def packing(view: VersionSpaceView, dist: Distribution, radius) -> tuple[int, ...]:
    """Greedy maximal packing in index order; pairwise distances exceed ``radius``."""
    if not view:
        raise DomainError("packing an empty view")
    lim = to_fraction(radius) * dist.denominator
    H = view.cls.hypotheses
    chosen: list[int] = []
    for i in view.indices:
        if all(dist.weight(H[i] ^ H[j]) > lim for j in chosen):
            chosen.append(i)
    return tuple(chosen)


@dataclass(frozen=True)
class DoublingResult:
    value: float
    worst_cover: int
    worst_radius: Fraction
    center_pool: str


def doubling_dimension(cls: ConceptClass, dist: Distribution, target: int, r0,
                       centers: str = "all-labelings") -> DoublingResult:
    """max over r >= r0 of log2 N(r/2, B(target, r))."""
    _check_target(cls, target)
    r0 = to_fraction(r0)
    if r0 <= 0:
        raise DomainError("r0 must be > 0")
    prof = radius_profile(cls, target, dist)
    cands = [r0] + [rho for rho in prof.radii if r0 < rho <= 1]
    worst, worst_r = 0, r0
    for r in cands:
        n = covering_number(ball(cls, target, r, dist), dist, r / 2, "exact", centers).size
        if n > worst:
            worst, worst_r = n, r
    return DoublingResult(math.log2(worst), worst, worst_r, centers)


# ----------------------------------------------------------------------------
# uniform-deviation envelope

def Log(x) -> float:
    if x == math.inf:
        return math.inf
    return math.log(max(float(x), math.e))


def diameter(masks: Sequence[int], dist: Distribution) -> Fraction:
    best = 0
    for i, h in enumerate(masks):
        for g in masks[i + 1:]:
            best = max(best, dist.weight(h ^ g))
    return Fraction(best, dist.denominator)


def u_complexity(view: VersionSpaceView | Sequence[int], m: int, delta, region: int,
                 dist: Distribution, c0, n_points: int | None = None, grid: int = 512) -> float:
    """1 ∧ inf over r > diam of the local uniform-deviation envelope.

    The infimum is taken over {diam, P(region)} plus a geometric grid of
    ``grid`` radii spanning [max(diam, 1e-9), 1].
    """
    if isinstance(view, VersionSpaceView):
        masks, n_points = view.masks, view.cls.n
    else:
        masks = tuple(view)
        n_points = n_points if n_points is not None else dist.n
    c0, delta = float(c0), float(delta)
    if c0 <= 1:
        raise DomainError("c0 must be > 1")
    if not 0 < delta < 1:
        raise DomainError("delta must lie in (0, 1)")
    if m < 1:
        raise DomainError("m must be >= 1")
    vc = vc_dimension(masks, n_points)
    diam = float(diameter(masks, dist))
    pr = float(dist.mass(region))
    lo = max(diam, 1e-9)
    radii = {diam, pr}
    if lo < 1:
        step = (1 / lo) ** (1 / (grid - 1))
        radii.update(lo * step ** i for i in range(grid))
    radii.add(1.0)
    ld = Log(1 / delta)
    best = math.inf
    for r in radii:
        if r < diam:
            continue
        if r == 0:
            if vc > 0:
                continue  # Log(P(R)/0) is infinite
            comp = ld  # 0 * Log(inf) = 0
        else:
            comp = vc * Log(pr / r) + ld
        val = c0 * math.sqrt(r * comp / m) + c0 * comp / m
        best = min(best, val)
    return min(1.0, best)
