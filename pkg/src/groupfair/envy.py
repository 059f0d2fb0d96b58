"""(k, h)-group envy-freeness and its near-alpha relaxation.

A pair of groups ``(G, H)`` with ``|G| = k`` and ``|H| = h`` violates
GEF^alpha_{k,h} when ``u_G(pi_G) < alpha * u_G(pi_H)``.  Groups may overlap and
every pair is checked, including ``G == H``; the single exception is the
``(n, n)`` layer, whose only pair is the grand coalition against itself and
which holds for every allocation.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from groupfair import kernels
from groupfair.groups import group_cross_utility, group_own_utility
from groupfair.model import (
    Allocation,
    Instance,
    allocation_cube,
    group_tables,
    iter_blocks,
    validate_allocation,
)


class ConsistencyError(AssertionError):
    """A computed taxonomy broke one of the implication theorems."""


def check_alpha(alpha) -> Fraction:
    alpha = Fraction(alpha)
    if not 0 <= alpha <= 1:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return alpha


def _check_size(name, value, n):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or not 1 <= value <= n:
        raise ValueError(f"{name} must be an integer in [1, {n}], got {value!r}")
    return int(value)


@dataclass(frozen=True)
class GefVerdict:
    holds: bool
    k: int
    h: int
    alpha: Fraction
    witness: tuple | None = None  # (G, H, own, cross) with own < alpha * cross


@dataclass(frozen=True)
class GefMatrix:
    """``entries[k-1][h-1]`` is the GEF^alpha_{k,h} verdict."""

    entries: tuple
    alpha: Fraction

    def __getitem__(self, kh):
        k, h = kh
        return self.entries[k - 1][h - 1]

    @property
    def n(self):
        return len(self.entries)


def _cube_for_alpha(cube, inst, alpha):
    p, q = alpha.numerator, alpha.denominator
    bound = max(p, q) * inst.n ** 2 * max(1, inst.max_bundle_value)
    return kernels.widen(cube, bound), p, q


def check_gef(inst: Instance, alloc: Allocation, k: int, h: int, alpha=1) -> GefVerdict:
    n = inst.n
    k = _check_size("k", k, n)
    h = _check_size("h", h, n)
    alpha = check_alpha(alpha)
    validate_allocation(inst, alloc)
    tab, cnt, groups = group_tables(n)
    V1, p, q = _cube_for_alpha(allocation_cube(inst, alloc), inst, alpha)
    hit = kernels.gef_first_violation(V1, tab, cnt, k, h, p, q)
    if hit < 0:
        return GefVerdict(True, k, h, alpha)
    G = groups[k][hit // int(cnt[h])]
    H = groups[h][hit % int(cnt[h])]
    own = group_own_utility(inst, alloc, G)
    cross = group_cross_utility(inst, alloc, G, H)
    if not own < alpha * cross:
        raise ConsistencyError(f"kernel reported {G} vs {H} but own={own}, cross={cross}")
    return GefVerdict(False, k, h, alpha, (G, H, own, cross))


def is_monotone_matrix(grid) -> bool:
    """True iff entry (k, h) implies every (p, q) with p >= k and q >= h."""
    grid = np.asarray(grid, dtype=bool)
    n = grid.shape[-1]
    for k in range(n):
        for h in range(n):
            if k + 1 < n and (grid[..., k, h] & ~grid[..., k + 1, h]).any():
                return False
            if h + 1 < n and (grid[..., k, h] & ~grid[..., k, h + 1]).any():
                return False
    return True


def gef_taxonomy(inst: Instance, alloc: Allocation, alpha=1) -> GefMatrix:
    alpha = check_alpha(alpha)
    validate_allocation(inst, alloc)
    tab, cnt, _ = group_tables(inst.n)
    V1, p, q = _cube_for_alpha(allocation_cube(inst, alloc), inst, alpha)
    grid = kernels.gef_matrix(V1[None], tab, cnt, p, q)[0]
    if not is_monotone_matrix(grid):
        raise ConsistencyError(f"GEF matrix for {list(alloc.assignment)} is not monotone")
    return GefMatrix(tuple(tuple(bool(x) for x in row) for row in grid), alpha)


def gef_table(inst: Instance, alpha=1, max_size=None) -> np.ndarray:
    """GEF^alpha matrices of every allocation in enumeration order, ``(N, n, n)``."""
    alpha = check_alpha(alpha)
    tab, cnt, _ = group_tables(inst.n)
    parts = []
    for _, _, cube in iter_blocks(inst, max_size):
        V, p, q = _cube_for_alpha(cube, inst, alpha)
        parts.append(kernels.gef_matrix(V, tab, cnt, p, q))
    return np.concatenate(parts, axis=0)


def exists_gef(inst: Instance, k: int, h: int, alpha=1, max_size=None) -> Allocation | None:
    """First allocation in enumeration order satisfying GEF^alpha_{k,h}, or None."""
    n = inst.n
    k = _check_size("k", k, n)
    h = _check_size("h", h, n)
    alpha = check_alpha(alpha)
    tab, cnt, _ = group_tables(n)
    for start, assignments, cube in iter_blocks(inst, max_size):
        V, p, q = _cube_for_alpha(cube, inst, alpha)
        hits = np.flatnonzero(kernels.gef_matrix(V, tab, cnt, p, q)[:, k - 1, h - 1])
        if hits.size:
            return Allocation(tuple(int(x) for x in assignments[hits[0]]))
    return None
