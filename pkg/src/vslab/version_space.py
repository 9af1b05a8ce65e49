"""Version spaces, disagreement regions, compression sets and exact masses."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .concept import ConceptClass, bits, popcount
from .errors import BudgetExceeded, DomainError, ParseError

DIST_HEADER = "vslab-dist v1"
NHAT_BUDGET = 10 ** 7


def to_fraction(value) -> Fraction:
    """Exact rational from an int, Fraction, decimal string or float (via its repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    try:
        return Fraction(Decimal(str(value).strip()))
    except (InvalidOperation, ValueError):
        try:
            return Fraction(str(value).strip())
        except ValueError:
            raise DomainError(f"not a number: {value!r}") from None


@dataclass(frozen=True)
class Distribution:
    """Point masses held as integer weights over a common denominator."""

    weights: tuple[int, ...]
    denominator: int

    @classmethod
    def from_masses(cls, masses: Sequence) -> "Distribution":
        fr = [to_fraction(v) for v in masses]
        if not fr:
            raise DomainError("distribution needs at least one point")
        if any(f < 0 for f in fr):
            raise DomainError("masses must be nonnegative")
        total = sum(fr)
        if abs(total - 1) > Fraction(1, 10 ** 12):
            raise DomainError(f"masses sum to {float(total)!r}, not 1")
        # renormalize so the stored masses sum to exactly 1
        fr = [f / total for f in fr]
        q = math.lcm(*(f.denominator for f in fr))
        return cls(tuple(int(f * q) for f in fr), q)

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        if n < 1:
            raise DomainError("n must be >= 1")
        return cls((1,) * n, n)

    @property
    def n(self) -> int:
        return len(self.weights)

    @cached_property
    def masses(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(w, self.denominator) for w in self.weights)

    @cached_property
    def probabilities(self):
        import numpy as np

        p = np.array(self.weights, dtype=float) / self.denominator
        return p / p.sum()

    @cached_property
    def support_mask(self) -> int:
        return sum(1 << i for i, w in enumerate(self.weights) if w)

    def weight(self, region: int) -> int:
        w = self.weights
        return sum(w[i] for i in bits(region))

    def mass(self, region: int) -> Fraction:
        return Fraction(self.weight(region), self.denominator)


def region_mass(dist: Distribution, region: int | Iterable[int]) -> Fraction:
    if not isinstance(region, int):
        region = sum(1 << i for i in set(region))
    return dist.mass(region)


def dumps_dist(dist: Distribution) -> str:
    return "\n".join([DIST_HEADER] + [_decimal_str(m) for m in dist.masses]) + "\n"


def _decimal_str(f: Fraction) -> str:
    # exact decimal when the denominator allows it, else a fraction literal
    d = f.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    if d != 1:
        return f"{f.numerator}/{f.denominator}"
    s = format(Decimal(f.numerator) / Decimal(f.denominator), "f")
    return s.rstrip("0").rstrip(".") if "." in s else s


def loads_dist(text: str) -> Distribution:
    lines = text.splitlines()
    if not lines or lines[0].strip() != DIST_HEADER:
        raise ParseError(f"expected header {DIST_HEADER!r}", 1)
    vals = []
    for k, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            vals.append(to_fraction(line))
        except DomainError as exc:
            raise ParseError(str(exc), k) from None
    try:
        return Distribution.from_masses(vals)
    except DomainError as exc:
        raise ParseError(str(exc), len(lines)) from None


def load_dist(path) -> Distribution:
    return loads_dist(Path(path).read_text())


def save_dist(dist: Distribution, path) -> None:
    Path(path).write_text(dumps_dist(dist))


@dataclass(frozen=True)
class LabeledSample:
    pairs: tuple[tuple[int, int], ...]

    @classmethod
    def from_target(cls, points: Iterable[int], target: int) -> "LabeledSample":
        return cls(tuple((int(x), 1 if target >> int(x) & 1 else -1) for x in points))

    def __len__(self) -> int:
        return len(self.pairs)

    def prefix(self, m: int) -> "LabeledSample":
        return LabeledSample(self.pairs[:m])

    @cached_property
    def label_masks(self) -> tuple[int, int]:
        pos = neg = 0
        for x, y in self.pairs:
            if y == 1:
                pos |= 1 << x
            elif y == -1:
                neg |= 1 << x
            else:
                raise DomainError(f"label must be +1 or -1, got {y!r}")
        return pos, neg


@dataclass(frozen=True)
class VersionSpaceView:
    cls: ConceptClass
    members: int  # bitmask over hypothesis indices

    @classmethod
    def full(cls, c: ConceptClass) -> "VersionSpaceView":
        return cls(c, (1 << len(c)) - 1)

    @classmethod
    def of(cls, c: ConceptClass, indices: Iterable[int]) -> "VersionSpaceView":
        return cls(c, sum(1 << i for i in set(indices)))

    @cached_property
    def indices(self) -> tuple[int, ...]:
        return tuple(bits(self.members))

    @cached_property
    def masks(self) -> tuple[int, ...]:
        H = self.cls.hypotheses
        return tuple(H[i] for i in self.indices)

    def __len__(self) -> int:
        return popcount(self.members)

    def __bool__(self) -> bool:
        return self.members != 0

    def __contains__(self, index: int) -> bool:
        return bool(self.members >> index & 1)

    def lowest(self) -> int:
        if not self.members:
            raise DomainError("empty version space")
        return (self.members & -self.members).bit_length() - 1


def consistent_members(masks: Sequence[int], pos: int, neg: int) -> int:
    out = 0
    for i, h in enumerate(masks):
        if h & pos == pos and not h & neg:
            out |= 1 << i
    return out


def version_space(cls: ConceptClass, sample: LabeledSample, within: VersionSpaceView | None = None) -> VersionSpaceView:
    pos, neg = sample.label_masks
    if within is None:
        return VersionSpaceView(cls, consistent_members(cls.hypotheses, pos, neg))
    H = cls.hypotheses
    out = 0
    for i in within.indices:
        h = H[i]
        if h & pos == pos and not h & neg:
            out |= 1 << i
    return VersionSpaceView(cls, out)


def dis_of_masks(masks: Iterable[int]) -> int:
    union, inter, first = 0, 0, True
    for h in masks:
        union |= h
        inter = h if first else inter & h
        first = False
    return union & ~inter


def disagreement_region(view: VersionSpaceView) -> int:
    """Point bitmask of DIS(view)."""
    if not view:
        raise DomainError("disagreement region of an empty view")
    return dis_of_masks(view.masks)


def worst_consistent_error(view: VersionSpaceView, dist: Distribution, target: int) -> Fraction:
    """max over members h of P(h != target); ``target`` is a positive-set mask."""
    if not view:
        raise DomainError("empty view")
    return Fraction(max(dist.weight(h ^ target) for h in view.masks), dist.denominator)


@dataclass(frozen=True)
class CompressionResult:
    size: int
    witness: tuple[tuple[int, int], ...]
    exact: bool
    evaluations: int = 0


def _diff_table(cls: ConceptClass, sample: LabeledSample):
    """Distinct pairs in first-occurrence order and, per hypothesis outside the
    version space, the sampled points where it contradicts the sample."""
    pos, neg = sample.label_masks
    if pos & neg:
        raise DomainError("version space is empty (contradictory sample)")
    seen = pos | neg
    diffs = []
    consistent = False
    for h in cls.hypotheses:
        d = (h ^ pos) & seen
        if d:
            diffs.append(d)
        else:
            consistent = True
    if not consistent:
        raise DomainError("version space is empty")
    pairs = []
    placed = 0
    for x, y in sample.pairs:
        if not placed >> x & 1:
            placed |= 1 << x
            pairs.append((x, y))
    return pairs, diffs


def compression_set_size(cls: ConceptClass, sample: LabeledSample, mode: str = "exact",
                         budget: int = NHAT_BUDGET) -> CompressionResult:
    """Smallest sub-sample whose version space equals that of ``sample``.

    A sub-sample works iff it hits the contradiction set of every hypothesis
    outside the version space.  Exact mode returns the lexicographically first
    minimum witness in sample order; greedy mode drops pairs one at a time and
    is only an upper bound.
    """
    pairs, diffs = _diff_table(cls, sample)
    order = [x for x, _ in pairs]
    label = dict(pairs)

    def hits_all(chosen: int, ds) -> bool:
        return all(d & chosen for d in ds)

    if mode == "greedy":
        keep = sum(1 << x for x in order)
        for x in order:
            if hits_all(keep & ~(1 << x), diffs):
                keep &= ~(1 << x)
        wit = tuple((x, label[x]) for x in order if keep >> x & 1)
        return CompressionResult(len(wit), wit, False)
    if mode != "exact":
        raise DomainError(f"unknown mode {mode!r}")

    # a point is forced when it alone contradicts some hypothesis
    forced = 0
    for d in diffs:
        if d & (d - 1) == 0:
            forced |= d
    residual = [d for d in diffs if not d & forced]
    chosen = 0
    evaluations = 0
    if residual:
        useful = 0
        for d in residual:
            useful |= d
        cands = [x for x in order if useful >> x & 1]
        found = False
        for k in range(1, len(cands) + 1):
            for combo in itertools.combinations(cands, k):
                evaluations += 1
                if evaluations > budget:
                    raise BudgetExceeded(
                        f"exact compression search exceeded {budget} evaluations; use mode='greedy'")
                cm = 0
                for x in combo:
                    cm |= 1 << x
                if hits_all(cm, residual):
                    chosen = cm
                    found = True
                    break
            if found:
                break
    keep = forced | chosen
    wit = tuple((x, label[x]) for x in order if keep >> x & 1)
    return CompressionResult(len(wit), wit, True, evaluations)


def nhat(cls: ConceptClass, sample: LabeledSample, budget: int = NHAT_BUDGET) -> int:
    return compression_set_size(cls, sample, "exact", budget).size


def prefix_nhats(cls: ConceptClass, points: Sequence[int], target: int,
                 budget: int = NHAT_BUDGET) -> list[int]:
    """n-hat of every prefix of the target-labeled sequence.

    Only the set of distinct points matters, so the value is recomputed only
    when a new point appears.
    """
    out = []
    seen = set()
    current = 0
    order: list[int] = []
    for x in points:
        if x not in seen:
            seen.add(x)
            order.append(x)
            current = nhat(cls, LabeledSample.from_target(order, target), budget)
        out.append(current)
    return out


def prefix_max_nhat(cls: ConceptClass, points: Sequence[int], target: int,
                    budget: int = NHAT_BUDGET) -> int:
    if target not in cls:
        raise DomainError("target must belong to the class")
    vals = prefix_nhats(cls, points, target, budget)
    return max(vals, default=0)


def running_max(values: Iterable[int]) -> list[int]:
    return list(itertools.accumulate(values, max))
