"""Prices of group envy-freeness, group Pareto efficiency and group fairness.

Every price is a worst-case ratio ``max welfare over a stronger layer / min
welfare over a weaker layer``.  All layers are computed once per instance by
full enumeration (see :func:`property_tables`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from groupfair.efficiency import gpe_table
from groupfair.envy import gef_table
from groupfair.groups import WelfareKind
from groupfair.model import Allocation, Instance, check_size, iter_blocks, theorem6_instance  # noqa: F401

INF = math.inf


@dataclass(frozen=True)
class PriceResult:
    """``value`` is a Fraction, :data:`INF`, or None when no layer pair is admissible."""

    value: Fraction | float | None
    welfare: WelfareKind
    params: dict | None = None
    numerator: Allocation | None = None
    denominator: Allocation | None = None


@dataclass(frozen=True)
class PropertyTables:
    gef_diag: np.ndarray      # (N, n): GEF_{k,k}
    gpe: np.ndarray           # (N, n): GPE_k
    own: np.ndarray           # (N, n): scaled own-bundle utilities (object ints)
    scale: int


@lru_cache(maxsize=8)
def property_tables(inst: Instance, max_size=None) -> PropertyTables:
    check_size(inst, max_size)
    gef = gef_table(inst, 1, max_size)
    diag = np.stack([gef[:, k, k] for k in range(inst.n)], axis=1)
    gpe = gpe_table(inst, 1, max_size)
    parts = [np.diagonal(cube, axis1=1, axis2=2).astype(object) for _, _, cube in iter_blocks(inst, max_size)]
    return PropertyTables(diag, gpe, np.concatenate(parts, axis=0), inst.scale)


def welfare_values(tables: PropertyTables, kind) -> list:
    """Exact welfare of every allocation in enumeration order."""
    kind = WelfareKind(kind)
    d = tables.scale
    n = tables.own.shape[1]
    out = []
    for row in tables.own:
        vals = [int(v) for v in row]
        if kind is WelfareKind.UTILITARIAN:
            out.append(Fraction(sum(vals), d))
        elif kind is WelfareKind.EGALITARIAN:
            out.append(Fraction(min(vals), d))
        else:
            out.append(Fraction(math.prod(vals), d ** n))
    return out


def _extremal(values, mask, direction):
    best = None
    for i in np.flatnonzero(mask):
        v = values[i]
        if best is None or (v > best[0] if direction == "max" else v < best[0]):
            best = (v, int(i))
    return best


def extremal_welfare(inst: Instance, predicate, welfare, direction="max", max_size=None):
    """``(value, allocation)`` of the extremal welfare over allocations meeting
    ``predicate`` (a boolean mask in enumeration order, or a callable on
    :class:`Allocation`); None if no allocation qualifies.  Ties go to the
    first allocation in enumeration order."""
    if direction not in ("max", "min"):
        raise ValueError("direction must be 'max' or 'min'")
    tables = property_tables(inst, max_size)
    if callable(predicate):
        mask = np.array([bool(predicate(Allocation.from_index(i, inst.n, inst.m)))
                         for i in range(inst.size)], dtype=bool)
    else:
        mask = np.asarray(predicate, dtype=bool)
    best = _extremal(welfare_values(tables, welfare), mask, direction)
    if best is None:
        return None
    return best[0], Allocation.from_index(best[1], inst.n, inst.m)


def ratio(num: Fraction, den: Fraction):
    if den == 0:
        return Fraction(1) if num == 0 else INF
    return Fraction(num) / den


def _price(inst, welfare, pairs, max_size):
    welfare = WelfareKind(welfare)
    tables = property_tables(inst, max_size)
    values = welfare_values(tables, welfare)
    best = None
    for params, num_mask, den_mask in pairs(tables):
        top = _extremal(values, num_mask, "max")
        if top is None:
            continue
        low = _extremal(values, den_mask, "min")
        r = ratio(top[0], low[0])
        if best is None or r > best[0]:
            best = (r, params, top[1], low[1])
    if best is None:
        return PriceResult(None, welfare)
    r, params, i, j = best
    return PriceResult(r, welfare, params,
                       Allocation.from_index(i, inst.n, inst.m), Allocation.from_index(j, inst.n, inst.m))


def price_gef(inst: Instance, welfare, max_size=None) -> PriceResult:
    n = inst.n

    def pairs(t):
        for k in range(1, n + 1):
            for h in range(1, k + 1):
                yield {"k": k, "h": h}, t.gef_diag[:, h - 1], t.gef_diag[:, k - 1]

    return _price(inst, welfare, pairs, max_size)


def price_gpe(inst: Instance, welfare, max_size=None) -> PriceResult:
    n = inst.n

    def pairs(t):
        for k in range(1, n + 1):
            for h in range(k, n + 1):
                yield {"k": k, "h": h}, t.gpe[:, h - 1], t.gpe[:, k - 1]

    return _price(inst, welfare, pairs, max_size)


def price_fair(inst: Instance, welfare, max_size=None) -> PriceResult:
    n = inst.n

    def pairs(t):
        for k in range(1, n + 1):
            yield {"k": k}, t.gef_diag[:, k - 1], t.gpe[:, k - 1]

    return _price(inst, welfare, pairs, max_size)


PRICE_FUNCTIONS = {"gef": price_gef, "gpe": price_gpe, "fair": price_fair}


def price_report(inst: Instance, welfares=tuple(WelfareKind), max_size=None) -> dict:
    """``{welfare: {"gef": PriceResult, "gpe": ..., "fair": ...}}``."""
    return {WelfareKind(w): {name: fn(inst, w, max_size) for name, fn in PRICE_FUNCTIONS.items()}
            for w in welfares}


def layered_allocation(n: int, k: int) -> Allocation | None:
    """Layered allocation for ``theorem6_instance``: agents ``0..k-1``
    keep their own item and the rest hold a cyclic shift of theirs.  None when
    exactly one agent would be left over (no one-item-each derangement)."""
    if not 1 <= k <= n or n - k == 1:
        return None
    rest = list(range(k, n))
    assignment = list(range(n))
    for idx, item in enumerate(rest):
        assignment[item] = rest[(idx + 1) % len(rest)] if rest else item
    return Allocation(tuple(assignment))
