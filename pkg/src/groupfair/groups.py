"""Arithmetic-mean group utilities, welfare functions and expected utilities.

The two aggregation functions :func:`group_own_utility` and
:func:`group_cross_utility` are the only place the arithmetic mean is encoded.
"""
from __future__ import annotations

import enum
import math
from fractions import Fraction
from typing import Sequence

from groupfair.model import Allocation, Instance, Lottery, bundle_utility


class WelfareKind(str, enum.Enum):
    UTILITARIAN = "utilitarian"
    EGALITARIAN = "egalitarian"
    NASH = "nash"


def make_group(members: Sequence[int], n: int) -> tuple:
    """Canonical group: sorted tuple of distinct agent indices in ``[0, n)``."""
    g = tuple(sorted(members))
    if not g:
        raise ValueError("a group must be nonempty")
    if len(set(g)) != len(g):
        raise ValueError(f"duplicate members in group {list(members)}")
    if g[0] < 0 or g[-1] >= n:
        raise ValueError(f"group {list(members)} has agents outside [0, {n})")
    return g


def agent_utilities(inst: Instance, alloc: Allocation) -> list:
    """``u_a(pi_a)`` for every agent."""
    bundles = alloc.bundles(inst.n)
    return [bundle_utility(inst, a, bundles[a]) for a in range(inst.n)]


def group_own_utility(inst: Instance, alloc: Allocation, G: Sequence[int]) -> Fraction:
    G = make_group(G, inst.n)
    return sum((bundle_utility(inst, a, alloc.bundle(a)) for a in G), Fraction(0)) / len(G)


def group_cross_utility(inst: Instance, alloc: Allocation, G: Sequence[int], H: Sequence[int]) -> Fraction:
    G = make_group(G, inst.n)
    H = make_group(H, inst.n)
    total = Fraction(0)
    for b in H:
        bundle = alloc.bundle(b)
        for a in G:
            total += bundle_utility(inst, a, bundle)
    return total / (len(G) * len(H))


def welfare_of(utilities: Sequence[Fraction], kind) -> Fraction:
    kind = WelfareKind(kind)
    if kind is WelfareKind.UTILITARIAN:
        return sum(utilities, Fraction(0))
    if kind is WelfareKind.EGALITARIAN:
        return min(utilities)
    # plain product, no n-th root
    return math.prod(utilities, start=Fraction(1))


def welfare(inst: Instance, alloc: Allocation, kind) -> Fraction:
    return welfare_of(agent_utilities(inst, alloc), kind)


def expected_group_utility(inst: Instance, lot: Lottery, G: Sequence[int], H: Sequence[int] | None = None) -> Fraction:
    """Expected utility of ``G`` for ``H``'s bundles under ``lot``.

    With ``H`` omitted (or equal to ``G``) the own-bundle mean is used.
    """
    G = make_group(G, inst.n)
    own = H is None or make_group(H, inst.n) == G
    total = Fraction(0)
    for alloc, w in lot.support:
        if own:
            total += w * group_own_utility(inst, alloc, G)
        else:
            total += w * group_cross_utility(inst, alloc, G, H)
    return total


def expected_agent_utilities(inst: Instance, lot: Lottery) -> list:
    out = [Fraction(0)] * inst.n
    for alloc, w in lot.support:
        for a, u in enumerate(agent_utilities(inst, alloc)):
            out[a] += w * u
    return out
