"""k-group Pareto efficiency for allocations and lotteries.

Dominance compares, for every group of ``k`` agents, the arithmetic mean of
members' own-bundle utilities.  All groups in a comparison have the same size,
so the kernels work with plain group sums.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from groupfair import kernels
from groupfair.envy import ConsistencyError, _check_size, check_alpha
from groupfair.groups import agent_utilities, expected_agent_utilities
from groupfair.model import (
    Allocation,
    Instance,
    Lottery,
    check_size,
    group_sum_matrix,
    group_tables,
    iter_blocks,
    make_lottery,
    validate_allocation,
    validate_lottery,
    value_cube,
)
from groupfair.simplex import OPTIMAL, maximize

_CACHE_LIMIT = 1 << 16


class AdversaryMode(str, enum.Enum):
    DETERMINISTIC = "deterministic"
    LOTTERY = "lottery"


@dataclass(frozen=True)
class GpeVerdict:
    holds: bool
    k: int
    alpha: Fraction
    dominator: Allocation | Lottery | None = None


@dataclass(frozen=True)
class GpeVector:
    """``entries[k-1]`` is the GPE^alpha_k verdict."""

    entries: tuple
    alpha: Fraction

    def __getitem__(self, k):
        return self.entries[k - 1]


def _group_sums(utilities, k):
    _, _, groups = group_tables(len(utilities))
    return [sum(utilities[a] for a in G) for G in groups[k]]


def _dominates(cand, inc, alpha):
    strict = False
    for c, i in zip(cand, inc):
        if alpha * c < i:
            return False
        if alpha * c > i:
            strict = True
    return strict


def group_dominates(inst: Instance, candidate: Allocation, incumbent: Allocation, k: int, alpha=1) -> bool:
    """Whether ``candidate`` k-group Pareto dominates ``incumbent`` at ``alpha``."""
    k = _check_size("k", k, inst.n)
    alpha = check_alpha(alpha)
    validate_allocation(inst, candidate)
    validate_allocation(inst, incumbent)
    cand = _group_sums(agent_utilities(inst, candidate), k)
    inc = _group_sums(agent_utilities(inst, incumbent), k)
    return _dominates(cand, inc, alpha)


def lottery_dominates(inst: Instance, candidate: Lottery, incumbent: Lottery, k: int, alpha=1) -> bool:
    """Dominance between lotteries in expected group utilities."""
    alpha = check_alpha(alpha)
    cand = _group_sums(expected_agent_utilities(inst, candidate), k)
    inc = _group_sums(expected_agent_utilities(inst, incumbent), k)
    return _dominates(cand, inc, alpha)


@lru_cache(maxsize=32)
def _cached_sums(inst, k):
    return _all_group_sums(inst, k, None)


def _all_group_sums(inst, k, max_size):
    parts = [group_sum_matrix(inst, cube, k) for _, _, cube in iter_blocks(inst, max_size)]
    return np.concatenate(parts, axis=0)


def all_group_sums(inst: Instance, k: int, max_size=None) -> np.ndarray:
    """Scaled own-utility sums of every size-``k`` group for every allocation, ``(N, C_k)``."""
    check_size(inst, max_size)
    if inst.size <= _CACHE_LIMIT:
        return _cached_sums(inst, k)
    return _all_group_sums(inst, k, max_size)


def _alloc_sums(inst, alloc, k):
    a = np.asarray(alloc.assignment, dtype=np.int64).reshape(1, inst.m)
    return group_sum_matrix(inst, value_cube(inst, a), k)[0]


def check_gpe(inst: Instance, alloc: Allocation, k: int, alpha=1, max_size=None) -> GpeVerdict:
    k = _check_size("k", k, inst.n)
    alpha = check_alpha(alpha)
    validate_allocation(inst, alloc)
    p, q = alpha.numerator, alpha.denominator
    bound = max(p, q) * inst.n * max(1, inst.max_bundle_value)
    T = kernels.widen(_alloc_sums(inst, alloc, k), bound)
    for start, _, cube in iter_blocks(inst, max_size):
        S = kernels.widen(group_sum_matrix(inst, cube, k), bound)
        j = kernels.first_dominator(S, T, p, q)
        if j >= 0:
            return GpeVerdict(False, k, alpha, Allocation.from_index(start + j, inst.n, inst.m))
    return GpeVerdict(True, k, alpha)


def is_downward_monotone(entries) -> bool:
    entries = np.asarray(entries, dtype=bool)
    return not (entries[..., 1:] & ~entries[..., :-1]).any()


def gpe_vector(inst: Instance, alloc: Allocation, alpha=1, max_size=None) -> GpeVector:
    alpha = check_alpha(alpha)
    entries = tuple(check_gpe(inst, alloc, k, alpha, max_size).holds for k in range(1, inst.n + 1))
    if not is_downward_monotone(entries):
        raise ConsistencyError(f"GPE vector for {list(alloc.assignment)} is not downward monotone")
    return GpeVector(entries, alpha)


def gpe_table(inst: Instance, alpha=1, max_size=None) -> np.ndarray:
    """GPE^alpha_k verdicts of every allocation in enumeration order, ``(N, n)``."""
    alpha = check_alpha(alpha)
    p, q = alpha.numerator, alpha.denominator
    bound = max(p, q) * inst.n * max(1, inst.max_bundle_value)
    cols = []
    for k in range(1, inst.n + 1):
        S = kernels.widen(all_group_sums(inst, k, max_size), bound)
        cols.append(np.asarray(kernels.gpe_holds(S, p, q), dtype=bool))
    return np.stack(cols, axis=1)


# --------------------------------------------------------------------------
# lotteries


def _expected_sums(inst, lot, k):
    total = [Fraction(0)] * len(group_tables(inst.n)[2][k])
    for alloc, w in lot.support:
        row = _alloc_sums(inst, alloc, k)
        total = [t + w * int(v) for t, v in zip(total, row)]
    return total


def check_lottery_gpe(inst: Instance, lot: Lottery, k: int, mode=AdversaryMode.DETERMINISTIC,
                      alpha=1, max_size=None) -> GpeVerdict:
    """GPE^alpha_k of a lottery against single allocations or against mixtures."""
    k = _check_size("k", k, inst.n)
    alpha = check_alpha(alpha)
    mode = AdversaryMode(mode)
    validate_lottery(inst, lot)
    check_size(inst, max_size)
    target = _expected_sums(inst, lot, k)
    if mode is AdversaryMode.DETERMINISTIC:
        w = math.lcm(1, *(t.denominator for t in target))
        p, q = alpha.numerator * w, alpha.denominator
        bound = max(p, q) * w * inst.n * max(1, inst.max_bundle_value)
        T = kernels.as_exact_array([int(t * w) for t in target], bound)
        for start, _, cube in iter_blocks(inst, max_size):
            S = kernels.widen(group_sum_matrix(inst, cube, k), bound)
            j = kernels.first_dominator(S, T, p, q)
            if j >= 0:
                dom = Allocation.from_index(start + j, inst.n, inst.m)
                return GpeVerdict(False, k, alpha, dom)
        return GpeVerdict(True, k, alpha)

    dom = _dominating_mixture(inst, target, k, alpha, max_size)
    if dom is None:
        return GpeVerdict(True, k, alpha)
    if not lottery_dominates(inst, dom, lot, k, alpha):
        raise ConsistencyError("linear program returned a non-dominating lottery")
    return GpeVerdict(False, k, alpha, dom)


def _dominating_mixture(inst, target, k, alpha, max_size):
    """Maximize total slack of ``alpha * E'[group sum] >= target`` over mixtures
    of all allocations; a dominating lottery exists iff the optimum is positive."""
    S = all_group_sums(inst, k, max_size)
    N, C = S.shape
    rows = []
    rhs = []
    for g in range(C):
        slack = [Fraction(0)] * C
        slack[g] = Fraction(-1)
        rows.append([alpha * int(S[j, g]) for j in range(N)] + slack)
        rhs.append(target[g])
    rows.append([Fraction(1)] * N + [Fraction(0)] * C)
    rhs.append(Fraction(1))
    cost = [Fraction(0)] * N + [Fraction(1)] * C
    res = maximize(cost, rows, rhs)
    if res.status != OPTIMAL or res.value <= 0:
        return None
    pairs = [(Allocation.from_index(j, inst.n, inst.m), res.x[j]) for j in range(N) if res.x[j] != 0]
    return make_lottery(pairs)


def check_support_gpe(inst: Instance, lot: Lottery, k: int, max_size=None) -> bool:
    validate_lottery(inst, lot)
    return all(check_gpe(inst, alloc, k, 1, max_size).holds for alloc in lot.allocations)


def improve_lottery(inst: Instance, lot: Lottery, k: int, max_size=None) -> Lottery:
    """Replace each non-k-GPE support allocation by the k-GPE allocation that
    dominates it with the largest total group utility (first in enumeration
    order on ties).  Weights are kept; allocations that coincide after
    replacement are merged."""
    k = _check_size("k", k, inst.n)
    validate_lottery(inst, lot)
    S = all_group_sums(inst, k, max_size)
    holds = np.asarray(kernels.gpe_holds(S, 1, 1), dtype=bool)
    totals = S.sum(axis=1)
    pairs = []
    for alloc, w in lot.support:
        i = alloc.index(inst.n)
        if holds[i]:
            pairs.append((alloc, w))
            continue
        dominating = (S >= S[i]).all(axis=1) & (S > S[i]).any(axis=1) & holds
        cand = np.flatnonzero(dominating)
        best = cand[np.argmax(totals[cand])]  # argmax keeps the first maximizer
        pairs.append((Allocation.from_index(int(best), inst.n, inst.m), w))
    return make_lottery(pairs)


def utilitarian_argmax_mask(inst: Instance, max_size=None) -> np.ndarray:
    S = all_group_sums(inst, inst.n, max_size)[:, 0]
    return S == S.max()

