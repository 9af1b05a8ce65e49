"""Label-noise models, the Bernstein class condition, and lower-bound scenarios."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .concept import ConceptClass, bits, star, star_witness
from .errors import DomainError, ParseError
from .rng import draw_points
from .version_space import Distribution, LabeledSample, _decimal_str, dumps_dist, loads_dist, to_fraction

NOISE_HEADER = "vslab-noise v1"


@dataclass(frozen=True)
class NoiseModel:
    """Per-point P(Y = +1 | X = x)."""

    eta_plus: tuple[Fraction, ...]

    def __post_init__(self):
        for v in self.eta_plus:
            if not 0 <= v <= 1:
                raise DomainError(f"conditional probability {v} outside [0, 1]")

    @classmethod
    def of(cls, values: Sequence) -> "NoiseModel":
        return cls(tuple(to_fraction(v) for v in values))

    @classmethod
    def deterministic(cls, target: int, n: int) -> "NoiseModel":
        return cls(tuple(Fraction(target >> x & 1) for x in range(n)))

    @property
    def n(self) -> int:
        return len(self.eta_plus)


def dumps_noise(noise: NoiseModel) -> str:
    return "\n".join([NOISE_HEADER] + [_decimal_str(v) for v in noise.eta_plus]) + "\n"


def loads_noise(text: str) -> NoiseModel:
    lines = text.splitlines()
    if not lines or lines[0].strip() != NOISE_HEADER:
        raise ParseError(f"expected header {NOISE_HEADER!r}", 1)
    vals = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            v = to_fraction(line)
        except DomainError as exc:
            raise ParseError(str(exc), k) from None
        if not 0 <= v <= 1:
            raise ParseError(f"value {line.strip()} outside [0, 1]", k)
        vals.append(v)
    return NoiseModel(tuple(vals))


def load_noise(path) -> NoiseModel:
    return loads_noise(Path(path).read_text())


def bounded_noise_from(target: int, beta, flip_set: int, n: int) -> NoiseModel:
    """Flip the target label with probability ``beta`` on ``flip_set`` (a point mask)."""
    beta = to_fraction(beta)
    if not 0 <= beta < Fraction(1, 2):
        raise DomainError("beta must lie in [0, 1/2)")
    out = []
    for x in range(n):
        pos = bool(target >> x & 1)
        if flip_set >> x & 1:
            out.append(1 - beta if pos else beta)
        else:
            out.append(Fraction(int(pos)))
    return NoiseModel(tuple(out))


def error_rates(cls: ConceptClass, dist: Distribution, noise: NoiseModel) -> list[Fraction]:
    """Exact er(h) = P(h(X) != Y) for every hypothesis."""
    m = dist.masses
    # er(h) = sum over x of P(x) * (1 - eta(x) if h(x) = +1 else eta(x))
    base = sum((m[x] * noise.eta_plus[x] for x in range(dist.n)), Fraction(0))
    delta = [m[x] * (1 - 2 * noise.eta_plus[x]) for x in range(dist.n)]
    return [base + sum((delta[x] for x in bits(h)), Fraction(0)) for h in cls.hypotheses]


def best_in_class(cls: ConceptClass, dist: Distribution, noise: NoiseModel) -> int:
    er = error_rates(cls, dist, noise)
    best = min(er)
    return er.index(best)


def is_beta_bounded(noise: NoiseModel, target: int, beta) -> bool:
    beta = to_fraction(beta)
    for x, p in enumerate(noise.eta_plus):
        wrong = 1 - p if target >> x & 1 else p
        if wrong > beta:
            return False
    return True


@dataclass(frozen=True)
class BernsteinResult:
    holds: bool
    violator: int | None
    best: int


def bernstein_check(cls: ConceptClass, dist: Distribution, noise: NoiseModel, a, alpha) -> BernsteinResult:
    """Check P(h != h*) <= a (er(h) - er(h*))^alpha for every h, exactly."""
    a, alpha = to_fraction(a), to_fraction(alpha)
    if a < 1:
        raise DomainError("a must be >= 1")
    if not 0 <= alpha <= 1:
        raise DomainError("alpha must lie in [0, 1]")
    er = error_rates(cls, dist, noise)
    hs = er.index(min(er))
    h_star = cls.hypotheses[hs]
    p, q = alpha.numerator, alpha.denominator
    for i, h in enumerate(cls.hypotheses):
        d = dist.mass(h ^ h_star)
        excess = er[i] - er[hs]
        # compare d^q <= a^q * excess^p in exact arithmetic (0^0 = 1)
        rhs = a ** q * (excess ** p if p else 1)
        if d ** q > rhs:
            return BernsteinResult(False, i, hs)
    return BernsteinResult(True, None, hs)


# ----------------------------------------------------------------------------
# sampling

def sample_labeled(dist: Distribution, labeler, m: int, gen: np.random.Generator) -> LabeledSample:
    """``m`` i.i.d. labeled examples. ``labeler`` is a target mask or a NoiseModel.

    Points are drawn first in both cases, so a noiseless model and the
    matching target produce identical samples from the same stream.
    """
    pts, ys = sample_arrays(dist, labeler, m, gen)
    return LabeledSample(tuple(zip(pts.tolist(), ys.tolist())))


def sample_arrays(dist: Distribution, labeler, m: int, gen: np.random.Generator):
    if m < 0:
        raise DomainError("m must be >= 0")
    pts = draw_points(dist, m, gen)
    if isinstance(labeler, NoiseModel):
        p = np.array([float(v) for v in labeler.eta_plus])
        u = gen.random(m)
        ys = np.where(u < p[pts], 1, -1)
    else:
        lab = np.array([1 if labeler >> x & 1 else -1 for x in range(dist.n)])
        ys = lab[pts] if m else np.zeros(0, dtype=np.int64)
    return pts, ys.astype(np.int64)


# ----------------------------------------------------------------------------
# lower-bound scenarios

@dataclass(frozen=True)
class LowerBoundScenario:
    kind: str
    cls: ConceptClass
    dist: Distribution
    target: int                      # hypothesis index of the risk minimizer / target
    noise: NoiseModel | None
    threshold: Fraction
    regime_bound: float | None
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> str:
        from .concept import dumps_class

        meta = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.metadata.items()}
        return json.dumps({
            "kind": self.kind,
            "class": dumps_class(self.cls),
            "class_name": self.cls.name,
            "dist": dumps_dist(self.dist),
            "target": self.target,
            "noise": dumps_noise(self.noise) if self.noise is not None else None,
            "threshold": str(self.threshold),
            "regime_bound": self.regime_bound,
            "metadata": meta,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "LowerBoundScenario":
        from .concept import loads_class

        d = json.loads(text)
        meta = dict(d["metadata"])
        return cls(
            d["kind"],
            loads_class(d["class"], d["class_name"]),
            loads_dist(d["dist"]),
            d["target"],
            loads_noise(d["noise"]) if d["noise"] is not None else None,
            Fraction(d["threshold"]),
            d["regime_bound"],
            meta,
        )


def realizable_star(cls: ConceptClass, eps) -> LowerBoundScenario:
    """Coupon-collector scenario on the class's own star witness."""
    eps = to_fraction(eps)
    if not 0 < eps < Fraction(1, 48):
        raise DomainError("eps must lie in (0, 1/48)")
    w = star_witness(cls)
    s = w.size
    if s < 2:
        raise DomainError("class needs a star set of size >= 2")
    cap = math.floor((1 + eps) / eps)
    k = min(s, cap)
    pts = w.points[:k]
    weights = [Fraction(0)] * cls.n
    for x in pts[1:]:
        weights[x] = eps
    weights[pts[0]] = 1 - (k - 1) * eps
    dist = Distribution.from_masses(weights)
    regime = math.log(min(s - 1, math.floor(1 / eps))) / (2 * float(eps))
    meta = {"eps": eps, "k": k, "star": s, "points": list(pts), "leaves": list(w.leaves[:k])}
    return LowerBoundScenario("realizable_star", cls, dist, w.center, None, eps, regime, meta)


def noisy_star(k: int, zeta, beta, t: int, cls: ConceptClass | None = None) -> LowerBoundScenario:
    """Star-set scenario with flip probability ``beta`` on x_1..x_k toward h_t.

    ``t`` is 1-based.  Without a class, star(k+1) is used.
    """
    zeta, beta = to_fraction(zeta), to_fraction(beta)
    if k < 2:
        raise DomainError("k must be >= 2")
    if not 0 < zeta <= Fraction(1, k):
        raise DomainError("zeta must lie in (0, 1/k]")
    if not 0 < beta < Fraction(1, 2):
        raise DomainError("beta must lie in (0, 1/2)")
    if not 1 <= t <= k:
        raise DomainError("t must lie in [1, k]")
    if cls is None:
        cls = star(k + 1)
    w = star_witness(cls)
    if w.size < k + 1:
        raise DomainError(f"class star number {w.size} is below the required {k + 1}")
    pts = w.points[:k + 1]
    leaves = w.leaves[:k]
    weights = [Fraction(0)] * cls.n
    for x in pts[:k]:
        weights[x] = zeta
    weights[pts[k]] = 1 - k * zeta
    dist = Distribution.from_masses(weights)
    h_t = cls.hypotheses[leaves[t - 1]]
    eta = []
    for x in range(cls.n):
        pos = bool(h_t >> x & 1)
        if x in pts[:k]:
            eta.append(1 - beta if pos else beta)
        else:
            eta.append(Fraction(int(pos)))
    noise = NoiseModel(tuple(eta))
    threshold = zeta / 2 * (1 - 2 * beta)
    meta = {"k": k, "zeta": zeta, "beta": beta, "t": t, "points": list(pts),
            "center": w.center, "leaves": list(leaves)}
    return LowerBoundScenario("noisy_star", cls, dist, leaves[t - 1], noise, threshold, None, meta)


def lower_bound_construction(kind: str, **params) -> LowerBoundScenario:
    if kind == "realizable_star":
        return realizable_star(params["cls"], params["eps"])
    if kind == "noisy_star":
        return noisy_star(params["k"], params["zeta"], params["beta"], params["t"], params.get("cls"))
    raise DomainError(f"unknown lower-bound kind {kind!r}")
