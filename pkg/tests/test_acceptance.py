"""Acceptance criteria 1-11, each at exact tolerance.

Run with ``pytest tests/test_acceptance.py``; the terminal summary prints one
pass/fail line per criterion (see ``conftest.pytest_terminal_summary``).
"""
import os
import subprocess
import sys
import time
from fractions import Fraction

import pytest

import oracles as O
from conftest import FIXTURES
from groupfair.efficiency import (
    AdversaryMode,
    check_gpe,
    check_lottery_gpe,
    gpe_table,
    utilitarian_argmax_mask,
)
from groupfair.envy import check_gef, gef_table
from groupfair.groups import (
    WelfareKind,
    agent_utilities,
    expected_agent_utilities,
    group_cross_utility,
    group_own_utility,
)
from groupfair.model import Allocation, example4_lottery, theorem6_instance
from groupfair.prices import INF, price_report
from groupfair.verify import ALPHAS, run_verify

HALF3 = Fraction(3, 2)


class timed:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.t = time.perf_counter()

    def __exit__(self, *exc):
        if exc[0] is None:
            elapsed = time.perf_counter() - self.t
            assert elapsed < self.limit, f"took {elapsed:.2f}s, limit {self.limit}s"


def test_criterion_01_proportional_not_envy_free(ex1, pistar):
    with timed(1):
        assert not check_gef(ex1, pistar, 1, 1).holds
        assert check_gef(ex1, pistar, 1, 3).holds
        assert agent_utilities(ex1, pistar) == [HALF3] * 3


def test_criterion_02_grand_envy_free(ex1, pistar):
    with timed(1):
        assert check_gef(ex1, pistar, 3, 1).holds
        grand = [0, 1, 2]
        assert group_own_utility(ex1, pistar, grand) == HALF3
        assert all(group_cross_utility(ex1, pistar, grand, [b]) == HALF3 for b in range(3))


def test_criterion_03_three_quarter_envy_free(ex1, pistar):
    with timed(1):
        assert check_gef(ex1, pistar, 1, 1, Fraction(3, 4)).holds
        assert not check_gef(ex1, pistar, 1, 1, 1).holds


def test_criterion_04_single_not_pair_efficient(ex3, pi1):
    swap = Allocation((1, 0))
    with timed(1):
        assert check_gpe(ex3, pi1, 1).holds
        assert not check_gpe(ex3, pi1, 2).holds
        assert group_own_utility(ex3, pi1, [0, 1]) == HALF3
        assert group_own_utility(ex3, swap, [0, 1]) == 2


def test_criterion_05_half_efficient(ex3, pibad):
    with timed(1):
        assert check_gpe(ex3, pibad, 1, Fraction(1, 2)).holds
        assert not check_gpe(ex3, pibad, 1, 1).holds


def test_criterion_06_lottery_vs_single_rivals(ex3):
    with timed(1):
        for eps, holds in [(0, True), (Fraction(1, 4), True), (Fraction(49, 100), True),
                           (Fraction(1, 2), False), (Fraction(3, 4), False)]:
            eps = Fraction(eps)
            lot = example4_lottery(eps)
            assert check_lottery_gpe(ex3, lot, 1, AdversaryMode.DETERMINISTIC).holds is holds
            assert expected_agent_utilities(ex3, lot) == [3 - 2 * eps, eps]


def _lattice_ok(grid, n):
    for k in range(n):
        for h in range(n):
            if grid[k, h] and not grid[k:, h:].all():
                return False
    return True


def test_criterion_07_implication_lattice(suite_instances):
    assert suite_instances[0][1].size == 27
    violations = 0
    with timed(60):
        for _, inst in suite_instances:
            for alpha in ALPHAS:
                gef = gef_table(inst, alpha)
                gpe = gpe_table(inst, alpha)
                for i in range(inst.size):
                    violations += not _lattice_ok(gef[i], inst.n)
                    violations += bool((gpe[i, 1:] & ~gpe[i, :-1]).any())
    assert violations == 0


def test_criterion_08_endpoint_oracles(suite_instances):
    discrepancies = 0
    for _, inst in suite_instances:
        raw = O.Raw(inst)
        gef, gpe = gef_table(inst), gpe_table(inst)
        argmax = utilitarian_argmax_mask(inst)
        best = O.utilitarian_max(raw)
        n = inst.n
        for i in range(inst.size):
            a = Allocation.from_index(i, n, inst.m).assignment
            discrepancies += gef[i, 0, 0] != O.envy_free(raw, a)
            discrepancies += gef[i, 0, n - 1] != O.proportional(raw, a)
            discrepancies += gpe[i, 0] != O.pareto_efficient(raw, a)
            discrepancies += gpe[i, n - 1] != (sum(raw.own(a)) == best)
            discrepancies += bool(argmax[i]) != (sum(raw.own(a)) == best)
    assert discrepancies == 0


def test_criterion_09_lottery_support():
    with timed(60):
        report = run_verify(instances=0, lotteries=50, lottery_max_n=3, lottery_max_m=3)
    t5 = next(t for t in report["theorems"] if t["id"] == "T5")
    assert t5["instances_checked"] == 50
    assert t5["counterexamples"] == []


def test_criterion_10_price_lower_bounds():
    eps = Fraction(1, 1000)
    failures = []
    with timed(30):
        for n in (2, 3, 4):
            rep = price_report(theorem6_instance(n, eps))
            for name, r in rep[WelfareKind.UTILITARIAN].items():
                if not (r.value == INF or r.value >= n):
                    failures.append(f"n={n} utilitarian {name} = {r.value}")
            for w in (WelfareKind.EGALITARIAN, WelfareKind.NASH):
                for name, r in rep[w].items():
                    if not (r.value == INF or r.value >= 1000):
                        failures.append(f"n={n} {w.value} {name} = {r.value}")
    assert not failures, "; ".join(failures)


def _cli(*argv, env=None):
    full = dict(os.environ, **(env or {}))
    r = subprocess.run([sys.executable, "-m", "groupfair", *argv], capture_output=True, env=full)
    return r.returncode, r.stdout


def test_criterion_11_determinism(tmp_path):
    e1, e3 = str(FIXTURES / "example1.json"), str(FIXTURES / "example3.json")
    commands = [
        ["check", "--instance", e1, "--allocation", str(FIXTURES / "pistar.json"), "--k", "2", "--h", "1"],
        ["taxonomy", "--instance", e1, "--allocation", str(FIXTURES / "pistar.json")],
        ["gpe", "--instance", e3, "--allocation", str(FIXTURES / "pi1.json")],
        ["prices", "--instance", e1],
        ["lottery", "--instance", e3, "--lottery", str(FIXTURES / "example4_lottery.json"), "--k", "1",
         "--mode", "lottery"],
        ["gen", "--n", "3", "--m", "3", "--seed", "7"],
        ["verify", "--seed", "5", "--instances", "20", "--lotteries", "10"],
    ]
    for argv in commands:
        first = _cli(*argv)
        assert first[1], argv
        assert _cli(*argv) == first, argv
        assert _cli(*argv, env={"GROUPFAIR_BACKEND": "numpy"}) == first, argv
    base = commands[-1]
    assert _cli(*base, "--workers", "3") == _cli(*base, "--workers", "1")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
