"""Exact two-phase simplex over :class:`fractions.Fraction`.

Solves ``max c.x  s.t.  A x = b, x >= 0`` with Bland's rule, so it terminates
on degenerate problems.  Sized for the small dominance programs built in
:mod:`groupfair.efficiency` (a handful of rows, up to a few hundred columns).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Fraction | None = None
    x: tuple | None = None


def _pivot(rows, basis, r, col):
    piv = rows[r][col]
    rows[r] = [v / piv for v in rows[r]]
    pr = rows[r]
    for i, row in enumerate(rows):
        if i != r and row[col] != 0:
            f = row[col]
            rows[i] = [a - f * b for a, b in zip(row, pr)]
    basis[r] = col


def _optimize(rows, basis, cost, allowed):
    """Maximize ``cost`` over the current tableau; returns False if unbounded."""
    while True:
        # reduced cost c_j - c_B . column_j
        enter = None
        for j in allowed:
            if j in basis:
                continue
            red = cost[j] - sum(cost[basis[i]] * rows[i][j] for i in range(len(rows)))
            if red > 0:
                enter = j
                break
        if enter is None:
            return True
        leave = None
        best = None
        for i, row in enumerate(rows):
            if row[enter] > 0:
                ratio = row[-1] / row[enter]
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return False
        _pivot(rows, basis, leave, enter)


def maximize(c, A, b) -> LPResult:
    m = len(A)
    nv = len(c)
    c = [Fraction(v) for v in c]
    rows = []
    for i in range(m):
        row = [Fraction(v) for v in A[i]]
        rhs = Fraction(b[i])
        if rhs < 0:
            row = [-v for v in row]
            rhs = -rhs
        art = [Fraction(0)] * m
        art[i] = Fraction(1)
        rows.append(row + art + [rhs])
    basis = [nv + i for i in range(m)]

    phase1 = [Fraction(0)] * nv + [Fraction(-1)] * m
    _optimize(rows, basis, phase1, range(nv + m))
    if any(rows[i][-1] != 0 for i in range(m) if basis[i] >= nv):
        return LPResult(INFEASIBLE)

    # drive zero-level artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] >= nv:
            col = next((j for j in range(nv) if rows[i][j] != 0), None)
            if col is None:
                continue
            _pivot(rows, basis, i, col)
        keep.append(i)
    rows = [rows[i][:nv] + [rows[i][-1]] for i in keep]
    basis = [basis[i] for i in keep]

    if not _optimize(rows, basis, c, range(nv)):
        return LPResult(UNBOUNDED)
    x = [Fraction(0)] * nv
    for i, j in enumerate(basis):
        x[j] = rows[i][-1]
    value = sum((cj * xj for cj, xj in zip(c, x)), Fraction(0))
    return LPResult(OPTIMAL, value, tuple(x))
