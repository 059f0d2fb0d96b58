from fractions import Fraction

import pytest

import oracles as O
from groupfair.efficiency import check_gpe
from groupfair.envy import check_gef
from groupfair.groups import WelfareKind
from groupfair.model import additive_instance, random_instance, theorem6_instance
from groupfair.prices import (
    INF,
    extremal_welfare,
    layered_allocation,
    price_fair,
    price_gef,
    price_gpe,
    price_report,
    ratio,
)


def test_ratio_conventions():
    assert ratio(Fraction(0), Fraction(0)) == 1
    assert ratio(Fraction(3), Fraction(0)) == INF
    assert ratio(Fraction(3), Fraction(2)) == Fraction(3, 2)


def test_single_agent_prices_are_one():
    inst = additive_instance([[2, 5]])
    for w in WelfareKind:
        for fn in (price_gef, price_gpe, price_fair):
            assert fn(inst, w).value == 1


def test_two_agent_utilitarian_gpe(ex3):
    r = price_gpe(ex3, "utilitarian")
    assert r.value == Fraction(4, 3)
    assert r.params == {"k": 1, "h": 1}


def test_prices_match_oracle(suite_instances):
    for _, inst in suite_instances[:60]:
        raw = O.Raw(inst)
        rep = price_report(inst)
        for w, by in rep.items():
            want = O.prices(raw, w.value)
            for name, res in by.items():
                assert res.value == want[name], (inst, w, name)


def test_result_allocations_realise_the_ratio(ex1):
    for w in WelfareKind:
        for fn in (price_gef, price_gpe, price_fair):
            r = fn(ex1, w)
            raw = O.Raw(ex1)
            num = O.welfare(raw, r.numerator.assignment, w.value)
            den = O.welfare(raw, r.denominator.assignment, w.value)
            assert ratio(num, den) == r.value


# Exact values on the lower-bound family at eps = 1/1000, computed by brute
# force over all n^n allocations (see the oracle cross-check below).
T6 = {
    2: {"gef": Fraction(1000), "gpe": Fraction(2000, 1001), "fair": Fraction(2000, 1001)},
    3: {"gef": Fraction(1000), "gpe": Fraction(500, 167), "fair": Fraction(500, 167)},
    4: {"gef": Fraction(1000), "gpe": Fraction(4000, 1003), "fair": Fraction(4000, 1003)},
}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_lower_bound_family_exact(n):
    eps = Fraction(1, 1000)
    inst = theorem6_instance(n, eps)
    rep = price_report(inst)
    for name, value in T6[n].items():
        assert rep[WelfareKind.UTILITARIAN][name].value == value
    assert T6[n]["gpe"] == n / (1 + (n - 1) * eps)
    for w in (WelfareKind.EGALITARIAN, WelfareKind.NASH):
        for name in ("gef", "gpe", "fair"):
            assert rep[w][name].value == INF


@pytest.mark.parametrize("n", [2, 3])
def test_lower_bound_family_oracle(n):
    inst = theorem6_instance(n, Fraction(1, 1000))
    raw = O.Raw(inst)
    for w in WelfareKind:
        want = O.prices(raw, w.value)
        got = {k: v.value for k, v in price_report(inst, [w])[w].items()}
        assert got == want


def test_lower_bound_family_eps_hundredth():
    # n = 3, eps = 1/100: gef reaches 1/eps, gpe and fair stay below n
    rep = price_report(theorem6_instance(3, Fraction(1, 100)))
    u = rep[WelfareKind.UTILITARIAN]
    assert u["gef"].value == 100
    assert u["gpe"].value == u["fair"].value == Fraction(50, 17)
    assert all(r.value == INF for r in rep[WelfareKind.NASH].values())


def test_layered_allocation():
    assert layered_allocation(4, 1).assignment == (0, 2, 3, 1)
    assert layered_allocation(4, 4).assignment == (0, 1, 2, 3)
    assert layered_allocation(4, 3) is None
    inst = theorem6_instance(4, Fraction(1, 1000))
    ident = layered_allocation(4, 4)
    assert check_gef(inst, ident, 1, 1).holds and check_gpe(inst, ident, 4).holds


def test_extremal_welfare(ex3):
    v, a = extremal_welfare(ex3, [True] * 4, "utilitarian", "max")
    assert v == 4 and a.assignment == (1, 0)
    v, _ = extremal_welfare(ex3, lambda al: al.assignment[0] == 0, "egalitarian", "min")
    assert v == 0
    assert extremal_welfare(ex3, [False] * 4, "nash") is None
    with pytest.raises(ValueError):
        extremal_welfare(ex3, [True] * 4, "nash", "sideways")


def test_undefined_when_no_admissible_pair():
    # no bundles at all: every layer holds, every welfare is zero
    inst = additive_instance([[], []])
    assert price_gef(inst, "nash").value == 1


def test_random_bundle_prices_are_at_least_one():
    for seed in range(10):
        inst = random_instance(3, 2, "bundle", 10, seed)
        for w, by in price_report(inst).items():
            for r in by.values():
                assert r.value is None or r.value >= 1
