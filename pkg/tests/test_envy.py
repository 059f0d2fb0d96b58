from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from groupfair.envy import (
    check_gef,
    exists_gef,
    gef_table,
    gef_taxonomy,
    is_monotone_matrix,
)
from groupfair.groups import group_cross_utility, group_own_utility
from groupfair.model import ADDITIVE, BUNDLE, Allocation, additive_instance, random_instance

ALPHAS = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


def test_three_agent_layers(ex1, pistar):
    assert not check_gef(ex1, pistar, 1, 1).holds
    assert check_gef(ex1, pistar, 1, 3).holds
    assert check_gef(ex1, pistar, 3, 1).holds
    assert check_gef(ex1, pistar, 1, 1, Fraction(3, 4)).holds


def test_witness_is_first_pair(ex1, pistar):
    v = check_gef(ex1, pistar, 1, 1)
    G, H, own, cross = v.witness
    assert (G, H) == ((0,), (2,))
    assert own == Fraction(3, 2) and cross == 2
    v = check_gef(ex1, pistar, 2, 1)
    assert v.witness == ((0, 1), (0,), Fraction(3, 2), Fraction(7, 4))


def test_three_agent_taxonomy(ex1, pistar):
    m = gef_taxonomy(ex1, pistar)
    assert m[1, 1] is False and m[1, 3] is True and m[3, 1] is True and m[3, 3] is True
    assert m.n == 3


def test_alpha_zero_always_holds(ex1):
    table = gef_table(ex1, 0)
    assert table.all()


def test_nn_layer_trivial(ex1):
    assert gef_table(ex1)[:, 2, 2].all()


def test_parameter_errors(ex1, pistar):
    for k, h in [(0, 1), (4, 1), (1, 4), (1.0, 1), (True, 1)]:
        with pytest.raises(ValueError):
            check_gef(ex1, pistar, k, h)
    with pytest.raises(ValueError):
        check_gef(ex1, pistar, 1, 1, Fraction(3, 2))
    with pytest.raises(ValueError):
        check_gef(ex1, pistar, 1, 1, -1)


def test_exists_gef(ex1):
    a = exists_gef(ex1, 1, 1)
    assert a is not None and check_gef(ex1, a, 1, 1).holds
    # two agents, one item both want: no envy-free allocation
    inst = additive_instance([[1], [1]])
    assert exists_gef(inst, 1, 1) is None
    assert exists_gef(inst, 2, 2) == Allocation((0,))


def test_table_matches_oracle(suite_instances):
    for _, inst in suite_instances[:40]:
        raw = O.Raw(inst)
        for alpha in (Fraction(1, 2), Fraction(1)):
            table = gef_table(inst, alpha)
            for i in range(inst.size):
                a = Allocation.from_index(i, inst.n, inst.m).assignment
                for k in range(1, inst.n + 1):
                    for h in range(1, inst.n + 1):
                        assert table[i, k - 1, h - 1] == O.gef(raw, a, k, h, alpha), (inst, a, k, h, alpha)


def test_endpoint_aliases(suite_instances):
    for _, inst in suite_instances:
        raw = O.Raw(inst)
        table = gef_table(inst)
        for i in range(inst.size):
            a = Allocation.from_index(i, inst.n, inst.m).assignment
            assert table[i, 0, 0] == O.envy_free(raw, a)
            assert table[i, 0, inst.n - 1] == O.proportional(raw, a)


def test_two_agent_agent_group_collapse():
    # with two agents, (1,1) and (1,2) agree on additive instances
    for seed in range(30):
        inst = random_instance(2, 3, ADDITIVE, 10, seed)
        t = gef_table(inst)
        assert (t[:, 0, 0] == t[:, 0, 1]).all()


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 3), st.integers(0, 3), st.sampled_from([ADDITIVE, BUNDLE]), st.integers(0, 10**6),
       st.sampled_from(ALPHAS), st.data())
def test_verdicts_are_monotone(n, m, kind, seed, alpha, data):
    inst = random_instance(n, m, kind, 10, seed)
    alloc = Allocation(tuple(data.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))))
    grid = np.array(gef_taxonomy(inst, alloc, alpha).entries)
    assert is_monotone_matrix(grid)
    looser = gef_taxonomy(inst, alloc, alpha / 2).entries
    assert (np.array(looser) >= grid).all()


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.integers(1, 3), st.integers(0, 10**6), st.data())
def test_witness_really_violates(n, m, seed, data):
    inst = random_instance(n, m, BUNDLE, 10, seed)
    alloc = Allocation(tuple(data.draw(st.lists(st.integers(0, n - 1), min_size=m, max_size=m))))
    k = data.draw(st.integers(1, n))
    h = data.draw(st.integers(1, n))
    v = check_gef(inst, alloc, k, h)
    if v.holds:
        return
    G, H, own, cross = v.witness
    assert len(G) == k and len(H) == h
    assert own == group_own_utility(inst, alloc, G) < group_cross_utility(inst, alloc, G, H) == cross


def test_is_monotone_matrix_detects_breaks():
    assert is_monotone_matrix([[True, True], [True, True]])
    assert not is_monotone_matrix([[True, False], [True, True]])
    assert not is_monotone_matrix([[False, False], [True, False]])
