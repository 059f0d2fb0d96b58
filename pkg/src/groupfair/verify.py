"""Enumeration-based verification of the implication and price theorems.

Each check runs over every allocation of seeded random instances and records
counterexamples with enough data to reproduce them.  Output depends only on
the arguments, never on the worker count.
"""
from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from groupfair.efficiency import (
    AdversaryMode,
    check_gpe,
    check_lottery_gpe,
    gpe_table,
    improve_lottery,
    is_downward_monotone,
    lottery_dominates,
    utilitarian_argmax_mask,
)
from groupfair.envy import check_gef, gef_table
from groupfair.groups import WelfareKind
from groupfair.model import (
    ADDITIVE,
    BUNDLE,
    Allocation,
    SizeLimitExceeded,
    example1_instance,
    format_rational,
    instance_to_dict,
    make_lottery,
    random_instance,
    resolve_max_size,
    theorem6_instance,
)
from groupfair.prices import INF, layered_allocation, price_report

log = logging.getLogger(__name__)

ALPHAS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))
THEOREMS = ("T1", "T2", "T3", "T4", "T5", "T6", "alpha-monotonicity")


def verify_instances(seed=0, count=100, max_n=3, max_m=4, include_example1=True):
    """``(label, instance)`` pairs checked by T1-T4 and alpha-monotonicity."""
    out = [("example1", example1_instance())] if include_example1 else []
    for i in range(count):
        rng = random.Random(f"verify:{seed}:{i}")
        n = rng.randint(1, max_n)
        m = rng.randint(0, max_m)
        kind = ADDITIVE if i % 2 == 0 else BUNDLE
        inst_seed = rng.randrange(2**31)
        out.append((f"random(n={n}, m={m}, kind={kind}, seed={inst_seed})",
                    random_instance(n, m, kind, 10, inst_seed)))
    return out


def _lattice_failures(grid, ks, hs):
    """``((k, h), (p, q))`` with ``k, p`` in ``ks``, ``h, q`` in ``hs``,
    ``p >= k``, ``q >= h``, where GEF_{k,h} holds but GEF_{p,q} does not."""
    bad = []
    for k in ks:
        for h in hs:
            if not grid[k - 1, h - 1]:
                continue
            bad.extend(((k, h), (p, q)) for p in ks if p >= k for q in hs
                       if q >= h and not grid[p - 1, q - 1])
    return bad


def _check_lattices(label, inst, max_size):
    """T1-T4 and alpha-monotonicity for one instance."""
    n = inst.n
    found = {t: [] for t in ("T1", "T2", "T3", "T4", "alpha-monotonicity")}
    gefs = {a: gef_table(inst, a, max_size) for a in ALPHAS}
    gpes = {a: gpe_table(inst, a, max_size) for a in ALPHAS}
    all_sizes = range(1, n + 1)

    def record(theorem, idx, **params):
        found[theorem].append({
            "instance": label,
            "instance_document": instance_to_dict(inst),
            "allocation": list(Allocation.from_index(idx, n, inst.m).assignment),
            "params": params,
        })

    for a in ALPHAS:
        alpha = format_rational(a)
        for idx in range(inst.size):
            grid = gefs[a][idx]
            for (k, h), (p, q) in _lattice_failures(grid, [1], all_sizes):
                record("T1", idx, alpha=alpha, holds=[k, h], fails=[p, q])
            for (k, h), (p, q) in _lattice_failures(grid, all_sizes, [1]):
                record("T2", idx, alpha=alpha, holds=[k, h], fails=[p, q])
            for (k, h), (p, q) in _lattice_failures(grid, all_sizes, all_sizes):
                record("T3", idx, alpha=alpha, holds=[k, h], fails=[p, q])
            if not is_downward_monotone(gpes[a][idx]):
                record("T4", idx, alpha=alpha, gpe=[bool(x) for x in gpes[a][idx]])
    for lo, hi in zip(ALPHAS, ALPHAS[1:]):
        for idx in np.flatnonzero((gefs[hi] & ~gefs[lo]).reshape(inst.size, -1).any(axis=1)):
            record("alpha-monotonicity", int(idx), property="GEF", alphas=[format_rational(lo), format_rational(hi)])
        for idx in np.flatnonzero((gpes[hi] & ~gpes[lo]).any(axis=1)):
            record("alpha-monotonicity", int(idx), property="GPE", alphas=[format_rational(lo), format_rational(hi)])
    return found, inst.size


def _random_lottery(inst, rng, pool):
    size = rng.randint(1, min(3, len(pool)))
    picks = rng.sample(list(pool), size)
    raw = [rng.randint(1, 6) for _ in picks]
    total = sum(raw)
    return make_lottery([(Allocation.from_index(int(i), inst.n, inst.m), Fraction(r, total))
                         for i, r in zip(picks, raw)])


def _check_lottery_case(case, max_size):
    """T5 for one seeded lottery: returns (counterexamples, allocations scanned)."""
    label, inst, lot = case
    found = []
    gpe = gpe_table(inst, 1, max_size)
    argmax = utilitarian_argmax_mask(inst, max_size)

    def record(kind, k, **extra):
        found.append({
            "instance": label,
            "instance_document": instance_to_dict(inst),
            "lottery": [[list(a.assignment), format_rational(w)] for a, w in lot.support],
            "params": {"check": kind, "k": k, **extra},
        })

    support_idx = [a.index(inst.n) for a in lot.allocations]
    for k in range(1, inst.n + 1):
        verdict = check_lottery_gpe(inst, lot, k, AdversaryMode.LOTTERY, 1, max_size)
        support_ok = all(gpe[i, k - 1] for i in support_idx)
        if verdict.holds and not support_ok:
            record("gpe lottery with non-gpe support", k)
        improved = improve_lottery(inst, lot, k, max_size)
        if not all(gpe[a.index(inst.n), k - 1] for a in improved.allocations):
            record("improve_lottery left a non-gpe support allocation", k)
        same = dict(improved.support) == dict(lot.support)
        if not same and not lottery_dominates(inst, improved, lot, k):
            record("improve_lottery output neither equal nor dominating", k)
        if k == inst.n:
            in_argmax = all(argmax[i] for i in support_idx)
            if verdict.holds != in_argmax:
                record("n-gpe differs from utilitarian arg-max support", k,
                       gpe=verdict.holds, argmax_support=in_argmax)
    return found, inst.size


def lottery_cases(seed=0, count=50, max_n=3, max_m=3):
    """Seeded lotteries; every other one is drawn from a GPE layer so the
    support premise is exercised, not just vacuously satisfied."""
    cases = []
    for i in range(count):
        rng = random.Random(f"lottery:{seed}:{i}")
        n = rng.randint(1, max_n)
        m = rng.randint(0, max_m)
        kind = ADDITIVE if rng.random() < 0.5 else BUNDLE
        inst_seed = rng.randrange(2**31)
        inst = random_instance(n, m, kind, 10, inst_seed)
        pool = range(inst.size)
        if i % 2 == 1:
            k = rng.randint(1, n)
            pool = np.flatnonzero(gpe_table(inst)[:, k - 1]).tolist()
        label = f"random(n={n}, m={m}, kind={kind}, seed={inst_seed})"
        cases.append((label, inst, _random_lottery(inst, rng, pool)))
    return cases


def _price_bound_ok(value, bound):
    return value is not None and (value == INF or value >= bound)


def check_theorem6(eps=Fraction(1, 1000), sizes=(2, 3, 4), max_size=None):
    """Prices on the lower-bound family against the bounds n (utilitarian)
    and 1/eps (egalitarian, Nash).  Also records whether the layered
    allocations (k agents on their own item, the rest shifted) satisfy
    (k, k)-GEF and k-GPE."""
    eps = Fraction(eps)
    found = []
    details = []
    allocations = 0
    for n in sizes:
        inst = theorem6_instance(n, eps)
        allocations += inst.size
        report = price_report(inst, max_size=max_size)
        prices = {}
        for w, by_kind in report.items():
            bound = Fraction(n) if w is WelfareKind.UTILITARIAN else 1 / eps
            for name, res in by_kind.items():
                prices[f"{name}/{w.value}"] = _render_value(res.value)
                if not _price_bound_ok(res.value, bound):
                    found.append({
                        "instance": f"theorem6(n={n}, eps={format_rational(eps)})",
                        "allocation": list(res.numerator.assignment) if res.numerator else None,
                        "params": {"price": name, "welfare": w.value, "value": _render_value(res.value),
                                   "claimed_lower_bound": format_rational(bound),
                                   "layers": res.params,
                                   "denominator_allocation": list(res.denominator.assignment)
                                   if res.denominator else None},
                    })
        layered = {}
        for k in range(1, n + 1):
            alloc = layered_allocation(n, k)
            if alloc is None:
                layered[str(k)] = "not constructible"
                continue
            layered[str(k)] = {
                "allocation": list(alloc.assignment),
                "gef_kk": check_gef(inst, alloc, k, k).holds,
                "gpe_k": check_gpe(inst, alloc, k, 1, max_size).holds,
            }
        details.append({"n": n, "eps": format_rational(eps), "prices": prices,
                        "limit_bound": format_rational(Fraction(n) / (1 + (n - 1) * eps)),
                        "layered_allocations": layered})
    return found, allocations, details


def _render_value(v):
    if v is None:
        return "undefined"
    if v == INF:
        return "+inf"
    return format_rational(v)


def _run_lattice(args):
    label, inst, max_size = args
    return _check_lattices(label, inst, max_size)


def _run_lottery(args):
    case, max_size = args
    return _check_lottery_case(case, max_size)


def verify_workload(instances, max_n, max_m, lotteries, lottery_max_n, lottery_max_m) -> int:
    """Worst-case number of allocations a run enumerates; the size guard
    applies to this total, not to a single instance."""
    price_family = sum(n ** n for n in (2, 3, 4))
    return (instances + 1) * max_n ** max_m + lotteries * lottery_max_n ** lottery_max_m + price_family


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def run_verify(seed=0, instances=100, max_n=3, max_m=4, lotteries=50, lottery_max_n=3, lottery_max_m=3,
               eps=Fraction(1, 1000), workers=1, max_size=None) -> dict:
    limit = resolve_max_size(max_size)
    worst = verify_workload(instances, max_n, max_m, lotteries, lottery_max_n, lottery_max_m)
    if worst > limit:
        raise SizeLimitExceeded(worst, limit)
    records = {t: {"id": t, "instances_checked": 0, "allocations_checked": 0, "counterexamples": []}
               for t in THEOREMS}

    cases = verify_instances(seed, instances, max_n, max_m)
    log.info("checking implication lattices on %d instances", len(cases))
    for (found, size) in _map(_run_lattice, [(lbl, inst, limit) for lbl, inst in cases], workers):
        for t in ("T1", "T2", "T3", "T4", "alpha-monotonicity"):
            records[t]["instances_checked"] += 1
            records[t]["allocations_checked"] += size
            records[t]["counterexamples"].extend(found[t])

    lots = lottery_cases(seed, lotteries, lottery_max_n, lottery_max_m)
    log.info("checking %d lotteries", len(lots))
    for found, size in _map(_run_lottery, [(c, limit) for c in lots], workers):
        records["T5"]["instances_checked"] += 1
        records["T5"]["allocations_checked"] += size
        records["T5"]["counterexamples"].extend(found)

    log.info("checking price bounds")
    found, allocs, details = check_theorem6(eps, max_size=limit)
    records["T6"]["instances_checked"] = 3
    records["T6"]["allocations_checked"] = allocs
    records["T6"]["counterexamples"] = found
    records["T6"]["details"] = details

    for rec in records.values():
        rec["status"] = "verified" if not rec["counterexamples"] else "counterexample found"
    return {
        "seed": seed,
        "config": {"instances": instances, "max_n": max_n, "max_m": max_m, "lotteries": lotteries,
                   "lottery_max_n": lottery_max_n, "lottery_max_m": lottery_max_m,
                   "eps": format_rational(Fraction(eps)), "alphas": [format_rational(a) for a in ALPHAS]},
        "theorems": [records[t] for t in THEOREMS],
        "ok": all(not r["counterexamples"] for r in records.values()),
    }

