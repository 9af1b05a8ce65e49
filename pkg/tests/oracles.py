"""Brute-force reference implementations used as test oracles.

These work on plain tuples of +1/-1 labels and share no code with the
package, so agreement is evidence rather than tautology.
"""
from itertools import combinations, permutations, product
from fractions import Fraction


def label_rows(cls):
    return [tuple(1 if h >> j & 1 else -1 for j in range(cls.n)) for h in cls.hypotheses]


def vc_brute(rows, n):
    best = 0
    for k in range(1, n + 1):
        for pts in combinations(range(n), k):
            patterns = {tuple(r[p] for p in pts) for r in rows}
            if len(patterns) == 2 ** k:
                best = k
                break
        else:
            # no k-set shattered, so no larger set is either
            break
    return best


def is_star(rows, h0, pts):
    """Every x_i has some h_i disagreeing with h0 on x_i and only x_i among pts."""
    for i, x in enumerate(pts):
        ok = False
        for r in rows:
            if r[x] != h0[x] and all(r[y] == h0[y] for j, y in enumerate(pts) if j != i):
                ok = True
                break
        if not ok:
            return False
    return True


def star_brute(rows, n):
    best = 0
    for h0 in rows:
        for k in range(best + 1, n + 1):
            if any(is_star(rows, h0, pts) for pts in combinations(range(n), k)):
                best = k
            else:
                break
    return best


def version_space_brute(rows, pairs):
    return frozenset(i for i, r in enumerate(rows) if all(r[x] == y for x, y in pairs))


def nhat_brute(rows, pairs):
    target = version_space_brute(rows, pairs)
    distinct = list(dict.fromkeys(pairs))
    for k in range(len(distinct) + 1):
        for sub in combinations(distinct, k):
            if version_space_brute(rows, sub) == target:
                return k
    return len(distinct)


def phi_grid_upper(rows, masses, eta, steps=4):
    """Best E[gamma] over a grid of (zeta, xi) values: an upper bound on the LP optimum."""
    n = len(masses)
    grid = [Fraction(i, steps) for i in range(steps + 1)]
    pairs = [(z, x) for z in grid for x in grid if z + x <= 1]
    best = Fraction(1)
    for choice in product(pairs, repeat=n):
        ok = True
        for r in rows:
            load = sum(masses[p] * (choice[p][0] if r[p] == 1 else choice[p][1]) for p in range(n))
            if load > eta:
                ok = False
                break
        if ok:
            val = sum(masses[p] * (1 - choice[p][0] - choice[p][1]) for p in range(n))
            best = min(best, val)
    return best
