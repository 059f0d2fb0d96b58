import random
from fractions import Fraction

import pytest
from scipy.optimize import linprog

from groupfair.simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, maximize

F = Fraction


def test_small_optimum():
    # max x + y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
    res = maximize([1, 1, 0, 0], [[1, 2, 1, 0], [3, 1, 0, 1]], [4, 6])
    assert res.status == OPTIMAL
    assert res.value == F(14, 5)
    assert res.x[:2] == (F(8, 5), F(6, 5))


def test_infeasible():
    assert maximize([1, 0], [[1, 1], [1, 1]], [1, 2]).status == INFEASIBLE


def test_unbounded():
    assert maximize([1, 0], [[1, -1]], [1]).status == UNBOUNDED


def test_redundant_rows():
    res = maximize([1, 2], [[1, 1], [2, 2]], [1, 2])
    assert res.status == OPTIMAL and res.value == 2


def test_negative_rhs_is_normalised():
    res = maximize([-1, 0], [[-1, 1]], [-2])
    assert res.status == OPTIMAL and res.value == -2


def _random_lp(rng):
    rows = rng.randint(1, 4)
    cols = rng.randint(rows, 7)
    A = [[F(rng.randint(-3, 4)) for _ in range(cols)] for _ in range(rows)]
    b = [F(rng.randint(-4, 8)) for _ in range(rows)]
    c = [F(rng.randint(-3, 4)) for _ in range(cols)]
    return c, A, b


@pytest.mark.parametrize("seed", range(300))
def test_against_scipy(seed):
    rng = random.Random(seed)
    c, A, b = _random_lp(rng)
    res = maximize(c, A, b)
    ref = linprog([-float(x) for x in c], A_eq=[[float(v) for v in r] for r in A], b_eq=[float(v) for v in b],
                  bounds=[(0, None)] * len(c), method="highs")
    status = {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}[ref.status]
    assert res.status == status
    if status == OPTIMAL:
        assert abs(float(res.value) + ref.fun) < 1e-7
        assert all(x >= 0 for x in res.x)
        for row, rhs in zip(A, b):
            assert sum(a * x for a, x in zip(row, res.x)) == rhs
        assert sum(ci * x for ci, x in zip(c, res.x)) == res.value


def test_degenerate_cycling_example():
    # classic Beale example, cycles under the textbook largest-coefficient rule
    c = [F(3, 4), F(-150), F(1, 50), F(-6), 0, 0, 0]
    A = [[F(1, 4), F(-60), F(-1, 25), F(9), 1, 0, 0],
         [F(1, 2), F(-90), F(-1, 50), F(3), 0, 1, 0],
         [0, 0, 1, 0, 0, 0, 1]]
    res = maximize(c, A, [0, 0, 1])
    assert res.status == OPTIMAL and res.value == F(1, 20)
