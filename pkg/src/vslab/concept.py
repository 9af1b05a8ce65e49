"""Finite instance spaces, concept classes and their combinatorial measures.

A hypothesis is stored as an ``int`` bitmask: bit ``i`` is set iff the
hypothesis labels point ``i`` positive.  All routines here are exact.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CapacityError, DomainError, ParseError

CLASS_HEADER = "vslab-class v1"
MEASURE_POINT_CAP = 64
HULL_CAP = 2 ** 20
EXCEEDS_CAP = "exceeds-cap"


def bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class InstanceSpace:
    points: tuple[str, ...]

    def __post_init__(self):
        if len(self.points) < 1:
            raise DomainError("instance space needs at least one point")
        if len(set(self.points)) != len(self.points):
            raise DomainError("point identifiers must be unique")
        for p in self.points:
            if not p or any(ch.isspace() for ch in p):
                raise DomainError(f"bad point identifier {p!r}")

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def index(self, point: str | int) -> int:
        if isinstance(point, int):
            if not 0 <= point < self.n:
                raise DomainError(f"point index {point} out of range")
            return point
        try:
            return self._lookup[point]
        except KeyError:
            raise DomainError(f"unknown point {point!r}") from None

    @cached_property
    def _lookup(self) -> dict[str, int]:
        return {p: i for i, p in enumerate(self.points)}


@dataclass(frozen=True)
class ConceptClass:
    """A finite, deduplicated set of labelings of ``space``.

    ``hypotheses`` holds positive-set bitmasks in a fixed order; that order
    defines hypothesis indices everywhere else in the package.
    """

    space: InstanceSpace
    hypotheses: tuple[int, ...]
    name: str = "class"

    def __post_init__(self):
        if len(set(self.hypotheses)) != len(self.hypotheses):
            raise DomainError("duplicate hypotheses; use ConceptClass.build to deduplicate")
        if len(self.hypotheses) < 3:
            raise DomainError("a concept class needs at least 3 hypotheses")
        full = self.space.full_mask
        for h in self.hypotheses:
            if h < 0 or h & ~full:
                raise DomainError("hypothesis mask does not fit the instance space")

    @classmethod
    def build(cls, space: InstanceSpace, masks: Iterable[int], name: str = "class") -> "ConceptClass":
        return cls(space, tuple(dict.fromkeys(masks)), name)

    @property
    def n(self) -> int:
        return self.space.n

    def __len__(self) -> int:
        return len(self.hypotheses)

    def labels(self, i: int) -> tuple[int, ...]:
        h = self.hypotheses[i]
        return tuple(1 if h >> j & 1 else -1 for j in range(self.n))

    def index_of(self, mask: int) -> int:
        try:
            return self._index[mask]
        except KeyError:
            raise DomainError("hypothesis not in class") from None

    def __contains__(self, mask: int) -> bool:
        return mask in self._index

    @cached_property
    def _index(self) -> dict[int, int]:
        return {h: i for i, h in enumerate(self.hypotheses)}

    def restrict(self, members: Sequence[int], name: str | None = None) -> "ConceptClass":
        return ConceptClass(self.space, tuple(self.hypotheses[i] for i in members), name or self.name)


def labels_to_mask(labels: Sequence[int]) -> int:
    m = 0
    for i, y in enumerate(labels):
        if y == 1:
            m |= 1 << i
        elif y != -1:
            raise DomainError(f"label must be +1 or -1, got {y!r}")
    return m


# ----------------------------------------------------------------------------
# generators

def _space(prefix: str, n: int) -> InstanceSpace:
    return InstanceSpace(tuple(f"{prefix}{i}" for i in range(n)))


def thresholds(n: int) -> ConceptClass:
    # h_t(x_i) = +1 iff i >= t, for t = 0..n
    full = (1 << n) - 1
    return ConceptClass.build(_space("p", n), (full & ~((1 << t) - 1) for t in range(n + 1)), f"thresholds({n})")


def intervals(n: int) -> ConceptClass:
    masks = [0]
    for i in range(n):
        for j in range(i, n):
            masks.append(((1 << (j + 1)) - 1) & ~((1 << i) - 1))
    return ConceptClass.build(_space("p", n), masks, f"intervals({n})")


def singletons(n: int) -> ConceptClass:
    return ConceptClass.build(_space("p", n), (1 << i for i in range(n)), f"singletons({n})")


def star(k: int) -> ConceptClass:
    return ConceptClass.build(_space("p", k), [0] + [1 << i for i in range(k)], f"star({k})")


def powerset(n: int, cap: int = 20) -> ConceptClass:
    if n > cap:
        raise CapacityError(f"powerset({n}) exceeds the cap n <= {cap}")
    return ConceptClass.build(_space("p", n), range(1 << n), f"powerset({n})")


def conjunctions(p: int, cap: int = 12) -> ConceptClass:
    """Conjunctions of literals over {0,1}^p; contradictory ones collapse to all-negative."""
    if p > cap:
        raise CapacityError(f"conjunctions({p}) exceeds the cap p <= {cap}")
    n = 1 << p
    space = InstanceSpace(tuple("x" + format(v, f"0{p}b") if p else "x" for v in range(n)))
    masks = []
    # each variable is absent (0), positive literal (1) or negated literal (2)
    for spec in itertools.product(range(3), repeat=p):
        m = 0
        for v in range(n):
            ok = True
            for j, s in enumerate(spec):
                bit = v >> (p - 1 - j) & 1
                if (s == 1 and not bit) or (s == 2 and bit):
                    ok = False
                    break
            if ok:
                m |= 1 << v
        masks.append(m)
    masks.append(0)
    return ConceptClass.build(space, masks, f"conjunctions({p})")


def axis_rectangles(w: int, h: int, cap: int = 24) -> ConceptClass:
    if w * h > cap:
        raise CapacityError(f"axis_rectangles({w}x{h}) exceeds the cap w*h <= {cap}")
    space = InstanceSpace(tuple(f"g{x}_{y}" for y in range(h) for x in range(w)))
    masks = [0]
    for x1 in range(w):
        for x2 in range(x1, w):
            for y1 in range(h):
                for y2 in range(y1, h):
                    masks.append(mask_of(y * w + x for y in range(y1, y2 + 1) for x in range(x1, x2 + 1)))
    return ConceptClass.build(space, masks, f"axis_rectangles({w}x{h})")


def at_most_d_positive(n: int, d: int, cap: int = 2 ** 20) -> ConceptClass:
    masks = []
    for k in range(d + 1):
        for combo in itertools.combinations(range(n), k):
            masks.append(mask_of(combo))
            if len(masks) > cap:
                raise CapacityError(f"at_most_d_positive({n},{d}) exceeds {cap} hypotheses")
    return ConceptClass.build(_space("p", n), masks, f"at_most_d_positive({n},{d})")


GENERATORS = {
    "thresholds": thresholds,
    "intervals": intervals,
    "singletons": singletons,
    "star": star,
    "powerset": powerset,
    "conjunctions": conjunctions,
    "axis_rectangles": axis_rectangles,
    "at_most_d_positive": at_most_d_positive,
}

_DESCRIPTOR = re.compile(r"^\s*([a-z_]+)\s*\(\s*([0-9,x\s]*)\s*\)\s*$")


def make_class(spec: str) -> ConceptClass:
    """Build a class from a descriptor such as ``"thresholds(5)"``,
    ``"axis_rectangles(4x4)"`` or ``"file:path/to/class.txt"``."""
    if spec.startswith("from_file:") or spec.startswith("file:"):
        return load_class(spec.split(":", 1)[1])
    m = _DESCRIPTOR.match(spec)
    if not m or m.group(1) not in GENERATORS:
        raise DomainError(f"unknown class descriptor {spec!r}; known: {', '.join(GENERATORS)}")
    name, raw = m.groups()
    args = [int(a) for a in re.split(r"[,x\s]+", raw.strip()) if a]
    try:
        return GENERATORS[name](*args)
    except TypeError as exc:
        raise DomainError(f"bad arguments for {name}: {exc}") from None


# ----------------------------------------------------------------------------
# persistence

def dumps_class(cls: ConceptClass) -> str:
    lines = [CLASS_HEADER, f"{cls.n} {len(cls)}", " ".join(cls.space.points)]
    for h in cls.hypotheses:
        lines.append(" ".join("+1" if h >> j & 1 else "-1" for j in range(cls.n)))
    return "\n".join(lines) + "\n"


def loads_class(text: str, name: str = "file") -> ConceptClass:
    lines = text.splitlines()
    if not lines or lines[0].strip() != CLASS_HEADER:
        raise ParseError(f"expected header {CLASS_HEADER!r}", 1)
    if len(lines) < 3:
        raise ParseError("truncated file", len(lines) + 1)
    try:
        n, count = (int(t) for t in lines[1].split())
    except ValueError:
        raise ParseError("expected 'n H'", 2) from None
    points = lines[2].split()
    if len(points) != n:
        raise ParseError(f"expected {n} point ids, got {len(points)}", 3)
    if len(lines) - 3 < count:
        raise ParseError(f"expected {count} hypothesis lines, got {len(lines) - 3}", len(lines) + 1)
    masks = []
    for k in range(count):
        lineno = 4 + k
        toks = lines[3 + k].split()
        if len(toks) != n:
            raise ParseError(f"expected {n} labels, got {len(toks)}", lineno)
        m = 0
        for j, t in enumerate(toks):
            if t in ("+1", "1"):
                m |= 1 << j
            elif t != "-1":
                raise ParseError(f"bad label token {t!r}", lineno)
        masks.append(m)
    for k in range(3 + count, len(lines)):
        if lines[k].strip():
            raise ParseError("trailing content after hypotheses", k + 1)
    try:
        space = InstanceSpace(tuple(points))
        return ConceptClass.build(space, masks, name)
    except DomainError as exc:
        raise ParseError(str(exc), 3) from None


def save_class(cls: ConceptClass, path) -> None:
    Path(path).write_text(dumps_class(cls))


def load_class(path) -> ConceptClass:
    p = Path(path)
    return loads_class(p.read_text(), p.stem)


# ----------------------------------------------------------------------------
# combinatorial measures

def _check_measure_cap(cls: ConceptClass) -> None:
    if cls.n > MEASURE_POINT_CAP:
        raise CapacityError(f"measures are capped at {MEASURE_POINT_CAP} points (got {cls.n})")


def shatters(masks: Iterable[int], subset: int) -> bool:
    k = popcount(subset)
    return len({h & subset for h in masks}) == 1 << k


def vc_dimension(cls: ConceptClass | Sequence[int], n: int | None = None) -> int:
    """Exact VC dimension by level-wise search over shattered point sets.

    Shattering is hereditary, so level k+1 candidates are built only from
    shattered k-sets.
    """
    if isinstance(cls, ConceptClass):
        _check_measure_cap(cls)
        masks, n = cls.hypotheses, cls.n
    else:
        masks = tuple(cls)
    if not masks:
        return 0
    # every distinct labeling of a point set counts; dedupe first
    masks = tuple(set(masks))
    size = len(masks)
    level = [()]  # shattered sets of the current size, as sorted index tuples
    shattered = {()}
    d = 0
    while level and (1 << (d + 1)) <= size:
        nxt = []
        for s in level:
            start = s[-1] + 1 if s else 0
            for y in range(start, n):
                cand = s + (y,)
                if any(cand[:i] + cand[i + 1:] not in shattered for i in range(len(cand) - 1)):
                    continue
                if shatters(masks, mask_of(cand)):
                    nxt.append(cand)
        if not nxt:
            break
        d += 1
        level = nxt
        shattered = set(nxt)
    return d


@dataclass(frozen=True)
class StarWitness:
    center: int                 # hypothesis index of h_0
    points: tuple[int, ...]     # x_1..x_s (point indices, ascending)
    leaves: tuple[int, ...]     # h_1..h_s (hypothesis indices)

    @property
    def size(self) -> int:
        return len(self.points)


def _minimal_sets(sets: Iterable[int]) -> list[int]:
    out: list[int] = []
    for s in sorted(set(sets), key=lambda m: (popcount(m), m)):
        if not any(t & s == t for t in out):
            out.append(s)
    return out


def _star_search(cls: ConceptClass, limit: int):
    """Largest star set of size <= limit, with its witness (or None if size 0)."""
    H = cls.hypotheses
    n = cls.n
    best_size = 0
    best = None
    for c_idx, h0 in enumerate(H):
        # conflicts[x]: minimal sets D(h0,h) \ {x} over h disagreeing with h0 at x
        conflicts: dict[int, list[int]] = {}
        owners: dict[tuple[int, int], int] = {}
        for g_idx, g in enumerate(H):
            diff = g ^ h0
            for x in bits(diff):
                rest = diff & ~(1 << x)
                conflicts.setdefault(x, []).append(rest)
                owners.setdefault((x, rest), g_idx)
        for x in list(conflicts):
            conflicts[x] = _minimal_sets(conflicts[x])
        pts = sorted(conflicts)
        if len(pts) <= best_size:
            continue

        def ok(x: int, S: int) -> bool:
            return any(c & S == 0 for c in conflicts[x])

        def valid_add(S_pts: list[int], S: int, y: int) -> bool:
            T = S | 1 << y
            if not ok(y, T & ~(1 << y)):
                return False
            return all(ok(x, T & ~(1 << x)) for x in S_pts)

        adj = {x: 0 for x in pts}
        for i, x in enumerate(pts):
            for y in pts[i + 1:]:
                if valid_add([x], 1 << x, y):
                    adj[x] |= 1 << y
                    adj[y] |= 1 << x

        def color_bound(cands: list[int]) -> int:
            # greedy colouring of the pairwise-compatibility graph bounds any clique
            colours: list[int] = []
            for v in cands:
                for ci, cm in enumerate(colours):
                    if not adj[v] & cm:
                        colours[ci] |= 1 << v
                        break
                else:
                    colours.append(1 << v)
            return len(colours)

        found: list[int] | None = None
        target = min(limit, len(pts))

        def dfs(S_pts: list[int], S: int, cands: list[int]):
            nonlocal found, best_size
            if len(S_pts) > best_size:
                best_size = len(S_pts)
                found = list(S_pts)
            if best_size >= target or not cands:
                return
            if len(S_pts) + len(cands) <= best_size:
                return
            if len(S_pts) + color_bound(cands) <= best_size:
                return
            for i, y in enumerate(cands):
                if len(S_pts) + len(cands) - i <= best_size:
                    return
                T = S | 1 << y
                rest = [z for z in cands[i + 1:] if adj[y] >> z & 1 and valid_add(S_pts + [y], T, z)]
                dfs(S_pts + [y], T, rest)
                if best_size >= target:
                    return

        dfs([], 0, pts)
        if found is not None:
            S = mask_of(found)
            leaves = []
            for x in found:
                rest = next(c for c in sorted(conflicts[x], key=lambda c: owners[(x, c)]) if c & S == 0)
                leaves.append(owners[(x, rest)])
            best = StarWitness(c_idx, tuple(found), tuple(leaves))
        if best_size >= min(limit, n):
            break
    return best_size, best


def star_number(cls: ConceptClass, cap: int | None = None):
    """Exact star number, or ``EXCEEDS_CAP`` if a star set larger than ``cap`` exists."""
    _check_measure_cap(cls)
    if cap is None:
        cap = cls.n
    if cap < 1:
        raise DomainError("cap must be >= 1")
    size, _ = _star_search(cls, cap + 1)
    return EXCEEDS_CAP if size > cap else size


def star_witness(cls: ConceptClass) -> StarWitness:
    _check_measure_cap(cls)
    size, w = _star_search(cls, cls.n)
    if w is None:
        raise DomainError("class has no star set")
    return w


def is_intersection_closed(cls: ConceptClass) -> bool:
    H = cls.hypotheses
    present = set(H)
    return all(H[i] & H[j] in present for i in range(len(H)) for j in range(i + 1, len(H)))


def closure_hull(cls: ConceptClass, cap: int = HULL_CAP) -> ConceptClass:
    """All intersections of positive sets over nonempty subfamilies."""
    seen = dict.fromkeys(cls.hypotheses)
    frontier = list(cls.hypotheses)
    base = list(cls.hypotheses)
    while frontier:
        new = []
        for a in frontier:
            for b in base:
                c = a & b
                if c not in seen:
                    seen[c] = None
                    new.append(c)
                    if len(seen) > cap:
                        raise CapacityError(f"closure hull exceeds {cap} hypotheses")
        frontier = new
    original = set(cls.hypotheses)
    extra = sorted(h for h in seen if h not in original)
    return ConceptClass(cls.space, cls.hypotheses + tuple(extra), f"closure({cls.name})")
