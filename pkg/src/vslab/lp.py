"""Exact two-phase simplex over rationals.

Solves ``maximize c.x  s.t.  A x <= b, x >= 0`` with ``Fraction`` arithmetic
and Bland's rule, so results are exact and the method always terminates.
Sizes here are desk scale (a few hundred rows and columns at most).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DomainError

ZERO = Fraction(0)


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


@dataclass(frozen=True)
class LPSolution:
    value: Fraction
    x: tuple[Fraction, ...]
    pivots: int


def _pivot(rows, rhs, zrow, zval, r, j):
    prow = rows[r]
    piv = prow[j]
    if piv != 1:
        inv = 1 / piv
        for k in list(prow):
            prow[k] *= inv
        rhs[r] *= inv
    pr = rhs[r]
    items = list(prow.items())
    for i, row in enumerate(rows):
        if i == r:
            continue
        f = row.get(j)
        if not f:
            continue
        for k, v in items:
            nv = row.get(k, ZERO) - f * v
            if nv:
                row[k] = nv
            else:
                row.pop(k, None)
        rhs[i] -= f * pr
    f = zrow.get(j)
    if f:
        for k, v in items:
            nv = zrow.get(k, ZERO) - f * v
            if nv:
                zrow[k] = nv
            else:
                zrow.pop(k, None)
        zval -= f * pr
    return zval


def _run(rows, rhs, basis, zrow, zval, allowed, limit):
    """Simplex iterations on a tableau in canonical form. ``zrow`` holds reduced
    costs in the 'z - c.x = zval' convention: optimal when no entry is negative."""
    pivots = 0
    while True:
        entering = None
        for j in sorted(k for k, v in zrow.items() if v < 0):
            if j in allowed:
                entering = j
                break
        if entering is None:
            return zval, pivots
        best = None
        for i, row in enumerate(rows):
            a = row.get(entering)
            if a is not None and a > 0:
                ratio = rhs[i] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise Unbounded()
        r = best[1]
        zval = _pivot(rows, rhs, zrow, zval, r, entering)
        basis[r] = entering
        pivots += 1
        if pivots > limit:
            raise RuntimeError("simplex pivot limit reached")


def maximize(c: Sequence, A: Sequence[Sequence], b: Sequence, limit: int = 10 ** 6) -> LPSolution:
    """Exact optimum of max c.x s.t. A x <= b, x >= 0.

    Raises ``Infeasible`` or ``Unbounded``.
    """
    n = len(c)
    m = len(A)
    if len(b) != m:
        raise DomainError("A and b have different row counts")
    c = [Fraction(v) for v in c]
    rows: list[dict[int, Fraction]] = []
    rhs: list[Fraction] = []
    basis: list[int] = []
    art = []
    # columns: 0..n-1 structural, n..n+m-1 slack, then artificials
    for i, (a_row, bi) in enumerate(zip(A, b)):
        if len(a_row) != n:
            raise DomainError(f"row {i} has {len(a_row)} entries, expected {n}")
        bi = Fraction(bi)
        row = {j: Fraction(v) for j, v in enumerate(a_row) if v}
        row[n + i] = Fraction(1)
        if bi < 0:
            row = {k: -v for k, v in row.items()}
            bi = -bi
            col = n + m + len(art)
            row[col] = Fraction(1)
            art.append(col)
            basis.append(col)
        else:
            basis.append(n + i)
        rows.append(row)
        rhs.append(bi)
    pivots = 0
    if art:
        # phase 1: maximize -sum(artificials)
        zrow: dict[int, Fraction] = {col: Fraction(1) for col in art}
        zval = ZERO
        for i, bcol in enumerate(basis):
            if bcol in zrow:
                for k, v in rows[i].items():
                    nv = zrow.get(k, ZERO) - v
                    if nv:
                        zrow[k] = nv
                    else:
                        zrow.pop(k, None)
                zval -= rhs[i]
        allowed = set(range(n + m + len(art)))
        zval, p = _run(rows, rhs, basis, zrow, zval, allowed, limit)
        pivots += p
        if zval != 0:
            raise Infeasible()
        artset = set(art)
        keep = []
        for i in range(len(rows)):
            if basis[i] in artset:
                swap = next((k for k in sorted(rows[i]) if k not in artset and rows[i][k]), None)
                if swap is None:
                    continue  # redundant row
                _pivot(rows, rhs, {}, ZERO, i, swap)
                basis[i] = swap
            keep.append(i)
        rows = [rows[i] for i in keep]
        rhs = [rhs[i] for i in keep]
        basis = [basis[i] for i in keep]
        for row in rows:
            for col in art:
                row.pop(col, None)
    zrow = {j: -v for j, v in enumerate(c) if v}
    zval = ZERO
    for i, bcol in enumerate(basis):
        f = zrow.get(bcol)
        if f:
            for k, v in rows[i].items():
                nv = zrow.get(k, ZERO) - f * v
                if nv:
                    zrow[k] = nv
                else:
                    zrow.pop(k, None)
            zval -= f * rhs[i]
    zval, p = _run(rows, rhs, basis, zrow, zval, set(range(n + m)), limit)
    pivots += p
    x = [ZERO] * n
    for i, bcol in enumerate(basis):
        if bcol < n:
            x[bcol] = rhs[i]
    return LPSolution(zval, tuple(x), pivots)
