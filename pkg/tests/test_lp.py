import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from vslab.lp import Infeasible, Unbounded, maximize


def test_small_example():
    # max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
    sol = maximize([3, 2], [[1, 1], [1, 3], [1, 0]], [4, 6, 3])
    assert sol.value == 11
    assert sol.x == (3, 1)


def test_rational_optimum_is_exact():
    sol = maximize([1, 1], [[3, 1], [1, 3]], [1, 1])
    assert sol.value == Fraction(1, 2)
    assert all(isinstance(v, Fraction) for v in sol.x)


def test_negative_rhs_needs_phase_one():
    # x >= 1 written as -x <= -1; max -x gives -1
    assert maximize([-1], [[-1]], [-1]).value == -1


def test_infeasible_and_unbounded():
    with pytest.raises(Infeasible):
        maximize([1], [[1], [-1]], [1, -2])
    with pytest.raises(Unbounded):
        maximize([1, 0], [[-1, 1]], [1])


def test_degenerate_does_not_cycle():
    # a classic cycling instance for the largest-coefficient rule
    c = [Fraction(3, 4), -150, Fraction(1, 50), -6]
    A = [[Fraction(1, 4), -60, Fraction(-1, 25), 9], [Fraction(1, 2), -90, Fraction(-1, 50), 3], [0, 0, 1, 0]]
    assert maximize(c, A, [0, 0, 1]).value == Fraction(1, 20)


def test_agrees_with_scipy_on_random_bounded_lps():
    r = random.Random(11)
    for _ in range(150):
        n, m = r.randint(1, 5), r.randint(1, 6)
        A = [[r.randint(-3, 6) for _ in range(n)] for _ in range(m)]
        # a box keeps the problem bounded; b >= 0 keeps it feasible
        A += [[int(i == j) for j in range(n)] for i in range(n)]
        b = [r.randint(0, 9) for _ in range(m)] + [10] * n
        c = [r.randint(-5, 5) for _ in range(n)]
        ours = maximize(c, A, b)
        ref = linprog(-np.array(c, float), A_ub=np.array(A, float), b_ub=np.array(b, float), method="highs")
        assert ref.status == 0
        assert float(ours.value) == pytest.approx(-ref.fun, abs=1e-7)
        # the returned point is feasible and attains the value exactly
        assert all(sum(a * x for a, x in zip(row, ours.x)) <= bi for row, bi in zip(A, b))
        assert sum(ci * x for ci, x in zip(c, ours.x)) == ours.value
