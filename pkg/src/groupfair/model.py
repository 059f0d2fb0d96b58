"""Instances, allocations and lotteries.

All utilities are :class:`fractions.Fraction`.  An :class:`Instance` also
carries an integer image of its utilities (every value times the common
denominator ``scale``) which the kernels use for exact comparisons.
"""
from __future__ import annotations

import itertools
import json
import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from groupfair.kernels import as_exact_array

ADDITIVE = "additive"
BUNDLE = "bundle"
MODEL_KINDS = (ADDITIVE, BUNDLE)

DEFAULT_MAX_SIZE = 10**7
MAX_SIZE_ENV = "GROUPFAIR_MAX_SIZE"
CHUNK = 1 << 15

# denominators used by random_instance
RANDOM_DENOMINATORS = (1, 2, 3, 4)


class InstanceError(ValueError):
    """Malformed or invalid instance, allocation or lottery document."""


class SizeLimitExceeded(RuntimeError):
    def __init__(self, size, limit):
        super().__init__(f"allocation space has {size} elements, above the size limit {limit}")
        self.size = size
        self.limit = limit


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise InstanceError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise InstanceError(f"rationals are written as \"p/q\" strings, got {text!r}")
    s = text.strip()
    num, sep, den = s.partition("/")
    try:
        if sep:
            return Fraction(int(num), int(den))
        return Fraction(int(num))
    except (ValueError, ZeroDivisionError):
        raise InstanceError(f"not a rational: {text!r}") from None


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def resolve_max_size(max_size=None) -> int:
    if max_size is not None:
        return int(max_size)
    env = os.environ.get(MAX_SIZE_ENV)
    if env:
        return int(env)
    return DEFAULT_MAX_SIZE


def _mask(items: Iterable[int]) -> int:
    m = 0
    for i in items:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class Instance:
    """Agents, items and per-agent bundle utilities.

    ``values`` holds, per agent, either a length-``m`` tuple of item values
    (additive model) or a length-``2**m`` tuple indexed by item bitmask with
    entry 0 fixed to 0 (bundle model).
    """

    agents: tuple
    items: tuple
    kind: str
    values: tuple

    def __post_init__(self):
        n, m = len(self.agents), len(self.items)
        if n < 1:
            raise InstanceError("an instance needs at least one agent")
        if len(set(self.agents)) != n:
            raise InstanceError("duplicate agent names")
        if len(set(self.items)) != m:
            raise InstanceError("duplicate item names")
        if self.kind not in MODEL_KINDS:
            raise InstanceError(f"unknown utility type {self.kind!r}")
        if len(self.values) != n:
            raise InstanceError(f"expected {n} utility rows, got {len(self.values)}")
        width = m if self.kind == ADDITIVE else 1 << m
        for a, row in enumerate(self.values):
            if len(row) != width:
                if self.kind == ADDITIVE:
                    raise InstanceError(
                        f"row length mismatch: agent {self.agents[a]} has {len(row)} values, expected {m}")
                raise InstanceError(f"incomplete bundle table for agent {self.agents[a]}")
            for v in row:
                if not isinstance(v, Fraction):
                    raise InstanceError(f"utility {v!r} is not a Fraction")
                if v < 0:
                    raise InstanceError(f"negative utility {format_rational(v)} for agent {self.agents[a]}")
            if self.kind == BUNDLE and row[0] != 0:
                raise InstanceError("the empty bundle must have utility 0")

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def m(self) -> int:
        return len(self.items)

    @property
    def size(self) -> int:
        """Number of allocations, ``n ** m``."""
        return self.n ** self.m

    @cached_property
    def scale(self) -> int:
        """Least common denominator of all utilities."""
        return math.lcm(1, *(v.denominator for row in self.values for v in row))

    @cached_property
    def int_values(self) -> np.ndarray:
        """Utilities times ``scale`` as an exact integer array."""
        d = self.scale
        rows = [[int(v * d) for v in row] for row in self.values]
        top = max((x for r in rows for x in r), default=0)
        # cube entries reach m * top and group sums n**2 times that
        bound = top * max(1, self.m) * self.n ** 2
        width = self.m if self.kind == ADDITIVE else 1 << self.m
        return as_exact_array(rows, bound).reshape(self.n, width)

    @cached_property
    def max_bundle_value(self) -> int:
        """Upper bound on any scaled bundle utility."""
        iv = self.int_values
        if iv.size == 0:
            return 0
        if self.kind == ADDITIVE:
            return int(iv.sum(axis=1).max())
        return int(iv.max())


def bundle_utility(inst: Instance, a: int, bundle: Iterable[int]) -> Fraction:
    """Exact utility of agent ``a`` for the item set ``bundle`` (0 for the empty set)."""
    items = set(bundle)
    row = inst.values[a]
    if inst.kind == ADDITIVE:
        return sum((row[i] for i in items), Fraction(0))
    return row[_mask(items)]


@dataclass(frozen=True)
class Allocation:
    """Item -> agent assignment; ``assignment[i]`` owns item ``i``."""

    assignment: tuple

    def bundle(self, a: int) -> tuple:
        return tuple(i for i, owner in enumerate(self.assignment) if owner == a)

    def bundles(self, n: int) -> list:
        out = [[] for _ in range(n)]
        for i, owner in enumerate(self.assignment):
            out[owner].append(i)
        return [tuple(b) for b in out]

    def index(self, n: int) -> int:
        """Position in :func:`enumerate_allocations` (item 0 is the lowest base-n digit)."""
        idx = 0
        for owner in reversed(self.assignment):
            idx = idx * n + owner
        return idx

    @classmethod
    def from_index(cls, idx: int, n: int, m: int) -> "Allocation":
        out = []
        for _ in range(m):
            idx, r = divmod(idx, n)
            out.append(r)
        return cls(tuple(out))

    @classmethod
    def from_bundles(cls, bundles: Sequence[Iterable[int]], m: int) -> "Allocation":
        owner = [None] * m
        for a, b in enumerate(bundles):
            for i in b:
                if owner[i] is not None:
                    raise InstanceError(f"item {i} assigned twice")
                owner[i] = a
        if any(o is None for o in owner):
            raise InstanceError("some item is unassigned")
        return cls(tuple(owner))


def validate_allocation(inst: Instance, alloc: Allocation) -> None:
    if len(alloc.assignment) != inst.m:
        raise InstanceError(f"assignment has {len(alloc.assignment)} entries, expected {inst.m}")
    for o in alloc.assignment:
        if isinstance(o, bool) or not isinstance(o, int) or not 0 <= o < inst.n:
            raise InstanceError(f"assignment out of range: {o!r}")


@dataclass(frozen=True)
class Lottery:
    """Finite distribution over allocations: a tuple of ``(Allocation, weight)``."""

    support: tuple

    @property
    def allocations(self) -> tuple:
        return tuple(a for a, _ in self.support)

    @property
    def weights(self) -> tuple:
        return tuple(w for _, w in self.support)


def validate_lottery(inst: Instance, lot: Lottery) -> None:
    """Raise :class:`InstanceError` unless ``lot`` is a valid lottery for ``inst``."""
    if not lot.support:
        raise InstanceError("empty support")
    seen = set()
    total = Fraction(0)
    for alloc, w in lot.support:
        validate_allocation(inst, alloc)
        if not isinstance(w, Fraction) or w <= 0:
            raise InstanceError(f"nonpositive weight {w}")
        if alloc.assignment in seen:
            raise InstanceError(f"duplicate support allocation {list(alloc.assignment)}")
        seen.add(alloc.assignment)
        total += w
    if total != 1:
        raise InstanceError(f"weights sum to {format_rational(total)}")


def make_lottery(pairs) -> Lottery:
    """Build a lottery from ``(allocation, weight)`` pairs, merging duplicate
    allocations and dropping zero weights."""
    merged = {}
    for alloc, w in pairs:
        if not isinstance(alloc, Allocation):
            alloc = Allocation(tuple(alloc))
        merged[alloc] = merged.get(alloc, Fraction(0)) + Fraction(w)
    return Lottery(tuple((a, w) for a, w in merged.items() if w != 0))


# --------------------------------------------------------------------------
# enumeration


def check_size(inst: Instance, max_size=None) -> int:
    limit = resolve_max_size(max_size)
    if inst.size > limit:
        raise SizeLimitExceeded(inst.size, limit)
    return inst.size


def enumerate_allocations(inst: Instance, max_size=None) -> Iterator[Allocation]:
    """All ``n ** m`` allocations in ascending base-n order, item 0 lowest digit."""
    check_size(inst, max_size)
    for digits in itertools.product(range(inst.n), repeat=inst.m):
        yield Allocation(tuple(reversed(digits)))


def assignment_block(n: int, m: int, start: int, stop: int) -> np.ndarray:
    """Assignments ``start..stop-1`` of the enumeration as an ``(N, m)`` array."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, m), dtype=np.int64)
    for i in range(m):
        idx, out[:, i] = np.divmod(idx, n)
    return out


def value_cube(inst: Instance, assignments: np.ndarray) -> np.ndarray:
    """Scaled ``u_a(pi_b)`` for every allocation row: shape ``(N, n, n)``."""
    n, m = inst.n, inst.m
    N = assignments.shape[0]
    iv = inst.int_values
    if m == 0:
        return np.zeros((N, n, n), dtype=iv.dtype)
    if inst.kind == ADDITIVE:
        onehot = (assignments[:, None, :] == np.arange(n)[None, :, None]).astype(np.int64)  # (N, n, m)
        if iv.dtype == object:
            onehot = onehot.astype(object)
        return np.matmul(iv, onehot.transpose(0, 2, 1))
    weights = (np.int64(1) << np.arange(m, dtype=np.int64))
    masks = np.zeros((N, n), dtype=np.int64)
    for b in range(n):
        masks[:, b] = ((assignments == b) * weights).sum(axis=1)
    return iv[np.arange(n)[None, :, None], masks[:, None, :]]


def iter_blocks(inst: Instance, max_size=None, chunk=CHUNK):
    """Yield ``(start, assignments, cube)`` over the full enumeration."""
    total = check_size(inst, max_size)
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        a = assignment_block(inst.n, inst.m, start, stop)
        yield start, a, value_cube(inst, a)


def allocation_cube(inst: Instance, alloc: Allocation) -> np.ndarray:
    a = np.asarray(alloc.assignment, dtype=np.int64).reshape(1, inst.m)
    return value_cube(inst, a)[0]


@lru_cache(maxsize=16)
def group_tables(n: int):
    """Padded lexicographic group tables ``(tab, cnt, groups)`` for ``n`` agents."""
    groups = [[]] + [list(itertools.combinations(range(n), k)) for k in range(1, n + 1)]
    cmax = max(len(g) for g in groups)
    tab = np.zeros((n + 1, cmax, max(n, 1)), dtype=np.int64)
    cnt = np.zeros(n + 1, dtype=np.int64)
    for k in range(1, n + 1):
        cnt[k] = len(groups[k])
        for g, members in enumerate(groups[k]):
            tab[k, g, :k] = members
    return tab, cnt, groups


def group_sum_matrix(inst: Instance, cube: np.ndarray, k: int) -> np.ndarray:
    """Sum of own-bundle utilities of each size-``k`` group, shape ``(N, C_k)``."""
    _, _, groups = group_tables(inst.n)
    member = np.zeros((len(groups[k]), inst.n), dtype=cube.dtype)
    for g, members in enumerate(groups[k]):
        member[g, list(members)] = 1
    diag = np.diagonal(cube, axis1=1, axis2=2)
    return diag @ member.T


# --------------------------------------------------------------------------
# documents


def instance_to_dict(inst: Instance) -> dict:
    doc = {"agents": list(inst.agents), "items": list(inst.items)}
    if inst.kind == ADDITIVE:
        doc["utilities"] = {
            "type": ADDITIVE,
            "matrix": [[format_rational(v) for v in row] for row in inst.values],
        }
    else:
        masks = sorted(range(1, 1 << inst.m), key=lambda s: (bin(s).count("1"), _bits(s)))
        doc["utilities"] = {
            "type": BUNDLE,
            "tables": [
                [{"bundle": _bits(s), "value": format_rational(row[s])} for s in masks]
                for row in inst.values
            ],
        }
    return doc


def _bits(mask: int) -> list:
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a mapping")
    try:
        agents = tuple(str(a) for a in doc["agents"])
        items = tuple(str(i) for i in doc["items"])
        util = doc["utilities"]
        kind = util["type"]
    except (KeyError, TypeError) as exc:
        raise InstanceError(f"missing field {exc}") from None
    n, m = len(agents), len(items)
    if kind == ADDITIVE:
        matrix = util.get("matrix")
        if not isinstance(matrix, list):
            raise InstanceError("additive utilities need a matrix")
        if len(matrix) != n:
            raise InstanceError(f"expected {n} utility rows, got {len(matrix)}")
        values = []
        for a, row in enumerate(matrix):
            if not isinstance(row, list) or len(row) != m:
                got = len(row) if isinstance(row, list) else "?"
                raise InstanceError(f"row length mismatch: agent {agents[a]} has {got} values, expected {m}")
            values.append(tuple(parse_rational(v) for v in row))
    elif kind == BUNDLE:
        tables = util.get("tables")
        if not isinstance(tables, list) or len(tables) != n:
            raise InstanceError(f"bundle utilities need {n} tables")
        values = []
        for a, table in enumerate(tables):
            row = [None] * (1 << m)
            row[0] = Fraction(0)
            for entry in table:
                try:
                    bundle, value = entry["bundle"], entry["value"]
                except (KeyError, TypeError):
                    raise InstanceError("bundle entries need 'bundle' and 'value'") from None
                if not bundle:
                    raise InstanceError("bundle tables list nonempty bundles only")
                if any(not isinstance(i, int) or not 0 <= i < m for i in bundle) or len(set(bundle)) != len(bundle):
                    raise InstanceError(f"bad bundle {bundle!r}")
                s = _mask(bundle)
                if row[s] is not None:
                    raise InstanceError(f"duplicate bundle {sorted(bundle)} for agent {agents[a]}")
                row[s] = parse_rational(value)
            if any(v is None for v in row):
                raise InstanceError(f"incomplete bundle table for agent {agents[a]}")
            values.append(tuple(row))
    else:
        raise InstanceError(f"unknown utility type {kind!r}")
    return Instance(agents, items, kind, tuple(values))


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None
    return instance_from_dict(doc)


def dumps(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def serialize_instance(inst: Instance) -> str:
    return dumps(instance_to_dict(inst))


def allocation_to_dict(alloc: Allocation) -> dict:
    return {"assignment": list(alloc.assignment)}


def allocation_from_dict(doc) -> Allocation:
    try:
        assignment = doc["assignment"]
    except (KeyError, TypeError):
        raise InstanceError("allocation document needs an 'assignment' list") from None
    if not isinstance(assignment, list):
        raise InstanceError("assignment must be a list")
    return Allocation(tuple(assignment))


def parse_allocation(text: str, inst: Instance | None = None) -> Allocation:
    try:
        alloc = allocation_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None
    if inst is not None:
        validate_allocation(inst, alloc)
    return alloc


def lottery_to_dict(lot: Lottery) -> dict:
    return {"support": [{"allocation": list(a.assignment), "weight": format_rational(w)}
                        for a, w in lot.support]}


def lottery_from_dict(doc) -> Lottery:
    try:
        support = doc["support"]
        pairs = []
        for entry in support:
            alloc = entry["allocation"]
            if isinstance(alloc, dict):
                alloc = alloc["assignment"]
            pairs.append((Allocation(tuple(alloc)), parse_rational(entry["weight"])))
    except (KeyError, TypeError):
        raise InstanceError("lottery document needs a 'support' list of {allocation, weight}") from None
    return Lottery(tuple(pairs))


def parse_lottery(text: str, inst: Instance | None = None) -> Lottery:
    try:
        lot = lottery_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None
    if inst is not None:
        validate_lottery(inst, lot)
    return lot


# --------------------------------------------------------------------------
# generators and presets


def _names(prefix, count):
    return tuple(f"{prefix}{i + 1}" for i in range(count))


def additive_instance(matrix, agents=None, items=None) -> Instance:
    rows = tuple(tuple(Fraction(v) for v in row) for row in matrix)
    n = len(rows)
    m = len(rows[0]) if rows else 0
    return Instance(tuple(agents or _names("a", n)), tuple(items or _names("o", m)), ADDITIVE, rows)


def random_instance(n: int, m: int, model_kind: str = ADDITIVE, value_bound: int = 10, seed: int = 0) -> Instance:
    """Reproducible random instance; values are ``p/d`` with ``p`` in
    ``[0, value_bound]`` and ``d`` from :data:`RANDOM_DENOMINATORS`."""
    if n < 1 or m < 0 or value_bound < 1:
        raise ValueError("need n >= 1, m >= 0 and value_bound >= 1")
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {model_kind!r}")
    rng = random.Random(f"groupfair:{n}:{m}:{model_kind}:{value_bound}:{seed}")

    def draw():
        return Fraction(rng.randint(0, value_bound), rng.choice(RANDOM_DENOMINATORS))

    if model_kind == ADDITIVE:
        values = tuple(tuple(draw() for _ in range(m)) for _ in range(n))
    else:
        values = tuple((Fraction(0),) + tuple(draw() for _ in range((1 << m) - 1)) for _ in range(n))
    return Instance(_names("a", n), _names("o", m), model_kind, values)


def theorem6_instance(n: int, eps) -> Instance:
    """``n`` agents and items; agent ``i`` values item ``i`` at 1 and every other item at ``eps``."""
    eps = Fraction(eps)
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    return additive_instance([[Fraction(1) if i == j else eps for j in range(n)] for i in range(n)])


def example1_instance() -> Instance:
    h = Fraction(3, 2)
    return additive_instance([[1, h, 2], [h, 2, 1], [2, 1, h]])


def example3_instance() -> Instance:
    return additive_instance([[1, 2], [2, 1]])


def example4_lottery(eps) -> Lottery:
    """Agent 1 gets item 1 surely and item 2 with probability ``1 - eps``."""
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    return make_lottery([(Allocation((0, 0)), 1 - eps), (Allocation((0, 1)), eps)])


PRESETS = {
    "example1": example1_instance,
    "example3": example3_instance,
}
