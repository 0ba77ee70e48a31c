# tests/test_abelian.py
import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings

from conftest import cyclic_subsets, cyclic_triples
from matchlab.abelian import (
    GroupElement, box_elements, cyclic_generators, element_op, groups_of_order,
    groups_of_order_at_most, make_group, make_subset, random_subset, smallest_subgroup_order,
    stabilizer, subgroup_closure, subgroups, sumset, translate,
)
from matchlab.errors import GroupMismatchError, PreconditionError


# ---------------------------------------------------------
# Construction and normal form
# ---------------------------------------------------------
@pytest.mark.parametrize("orders, expected", [
    ([2, 3], (6,)),
    ([4, 2], (2, 4)),
    ([2, 2, 4], (2, 2, 4)),
    ([6, 4], (2, 12)),
    ([], ()),
])
def test_invariant_factor_form(orders, expected):
    assert make_group(0, orders).torsion_orders == expected


def test_rejects_bad_groups():
    with pytest.raises(PreconditionError):
        make_group(-1)
    with pytest.raises(PreconditionError):
        make_group(0, [1])


def test_group_str_and_order():
    G = make_group(1, [2])
    assert str(G) == "Z x Z/2"
    assert G.order == math.inf
    assert not G.is_finite
    assert make_group(0, [3, 9]).order == 27


def test_element_coercion_reduces_residues(z8):
    assert z8.element(10) == GroupElement((), (2,))
    assert z8.element(-1) == GroupElement((), (7,))
    Z = make_group(1)
    assert Z.element(-3) == GroupElement((-3,), ())
    G = make_group(1, [4])
    assert G.element({"free": [2], "torsion": [5]}) == GroupElement((2,), (1,))


def test_element_shape_mismatch(z8):
    with pytest.raises(GroupMismatchError):
        z8.element([1, 2])
    with pytest.raises(GroupMismatchError):
        z8.check(GroupElement((), (9,)))


def test_element_op(z8):
    assert element_op(z8, "add", 5, 6) == z8.element(3)
    assert element_op(z8, "neg", 3) == z8.element(5)
    assert element_op(z8, "zero").is_zero
    with pytest.raises(PreconditionError):
        element_op(z8, "add", 1)
    with pytest.raises(PreconditionError):
        element_op(z8, "mul", 1, 2)


# ---------------------------------------------------------
# Subsets, sumsets, stabilizers
# ---------------------------------------------------------
def test_subset_is_sorted_and_deduplicated(z8):
    S = make_subset(z8, [6, 2, 10, 0])
    assert [str(x) for x in S] == ["0", "2", "6"]
    assert len(S) == 3


def test_sumset_example(z8_pair):
    A, B = z8_pair
    C = sumset(A, B)
    assert [str(x) for x in C] == ["1", "2", "3", "4", "5", "6", "7"]


def test_sumset_rejects_mixed_groups(z8, z4):
    with pytest.raises(GroupMismatchError):
        sumset(make_subset(z8, [1]), make_subset(z4, [1]))


def test_stabilizers(z8):
    evens = make_subset(z8, [0, 2, 4, 6])
    assert stabilizer(evens).elements == evens
    assert stabilizer(make_subset(z8, [1, 3, 5, 7])).elements == evens
    assert stabilizer(make_subset(z8, [0, 1])).is_trivial


def test_translate(z8):
    assert translate(make_subset(z8, [0, 4]), z8.element(3)) == make_subset(z8, [3, 7])


@given(cyclic_subsets())
@hsettings(max_examples=60, deadline=None)
def test_sumset_is_union_of_stabilizer_cosets(data):
    G, A, B = data
    C = sumset(A, B)
    H = stabilizer(C)
    assert len(C) % H.order == 0
    for h in H.elements:
        assert translate(C, h) == C


@given(cyclic_subsets())
@hsettings(max_examples=60, deadline=None)
def test_sumset_is_commutative(data):
    G, A, B = data
    assert sumset(A, B) == sumset(B, A)


@given(cyclic_triples())
@hsettings(max_examples=60, deadline=None)
def test_sumset_is_associative(data):
    G, A, B, C = data
    assert sumset(sumset(A, B), C) == sumset(A, sumset(B, C))


@given(cyclic_subsets())
@hsettings(max_examples=60, deadline=None)
def test_stabilizer_is_the_largest_period(data):
    G, A, B = data
    C = sumset(A, B)
    H = stabilizer(C)
    for K in subgroups(G):
        periodic = all(translate(C, k) == C for k in K.elements)
        # no subgroup strictly above H fixes C
        assert periodic == (K.elements.members <= H.elements.members), K


# ---------------------------------------------------------
# Subgroups
# ---------------------------------------------------------
@pytest.mark.parametrize("torsion, count", [([8], 4), ([2, 2], 5), ([12], 6), ([2, 4], 8), ([7], 2)])
def test_subgroup_counts(torsion, count):
    assert len(subgroups(make_group(0, torsion))) == count


def test_subgroups_sorted_by_order(z8):
    orders = [H.order for H in subgroups(z8)]
    assert orders == sorted(orders)
    assert subgroups(z8)[0].is_trivial
    assert not subgroups(z8)[-1].is_proper


def test_infinite_group_needs_order_bound():
    G = make_group(1, [2])
    with pytest.raises(PreconditionError):
        subgroups(G)
    assert [H.order for H in subgroups(G, order_bound=2)] == [1, 2]


def test_subgroup_closure(z8):
    H = subgroup_closure(z8, [6])
    assert H.elements == make_subset(z8, [0, 2, 4, 6])
    assert H.is_proper


@pytest.mark.parametrize("torsion, expected", [([9], 3), ([6], 2), ([3, 9], 3), ([25], 5)])
def test_smallest_subgroup_order(torsion, expected):
    assert smallest_subgroup_order(make_group(0, torsion)) == expected


def test_smallest_subgroup_order_torsion_free():
    assert smallest_subgroup_order(make_group(2)) == math.inf


def test_cyclic_generators(z8):
    assert [str(g) for g in cyclic_generators(z8)] == ["1", "3", "5", "7"]
    with pytest.raises(PreconditionError):
        cyclic_generators(make_group(0, [2, 2]))


# ---------------------------------------------------------
# Enumeration and sampling
# ---------------------------------------------------------
def test_groups_of_order():
    assert [G.torsion_orders for G in groups_of_order(8)] == [(2, 2, 2), (2, 4), (8,)]
    assert len(groups_of_order(12)) == 2
    assert len(groups_of_order_at_most(10)) == 13


def test_box_elements():
    G = make_group(1, [2])
    assert len(box_elements(G, 1)) == 6


def test_random_subset_is_reproducible(z8):
    first = random_subset(z8, 3, np.random.default_rng(7), exclude_zero=True)
    second = random_subset(z8, 3, np.random.default_rng(7), exclude_zero=True)
    assert first == second
    assert len(first) == 3
    assert z8.zero() not in first


def test_random_subset_too_large(z4):
    with pytest.raises(PreconditionError):
        random_subset(z4, 4, np.random.default_rng(0), exclude_zero=True)
