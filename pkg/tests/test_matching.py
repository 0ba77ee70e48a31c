# tests/test_matching.py
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from conftest import cyclic_pairs, cyclic_subsets
from matchlab.abelian import cyclic_generators, make_group, make_subset, subgroup_closure, subgroups
from matchlab.errors import (
    BudgetExceededError, GroupMismatchError, PreconditionError, QualificationError,
)
from matchlab.matching import (
    HallViolator, Matching, brute_force_matching, construct_counterexample,
    decide_matching_property, find_local_matching, find_matching, is_hall_violator,
    is_locally_matched, is_matching, kneser_verify,
)


# ---------------------------------------------------------
# Checking matchings
# ---------------------------------------------------------
def test_found_matching_is_valid(z8_pair):
    A, B = z8_pair
    result = find_matching(A, B)
    assert isinstance(result, Matching)
    assert is_matching(A, B, result.pairs)
    assert sorted(a for a, _ in result.pairs) == list(A)


def test_tampered_pair_names_the_sum(z8, z8_pair):
    A, B = z8_pair
    check = is_matching(A, B, [(0, 1), (2, 3), (6, 4)])
    assert not check
    assert check.clause == "sum_in_A"
    assert check.element == z8.element(6)
    assert check.detail == "6+4=2∈A"


def test_not_a_bijection(z8_pair):
    A, B = z8_pair
    check = is_matching(A, B, [(0, 1), (2, 1), (6, 4)])
    assert check.clause == "not_bijection"
    check = is_matching(A, B, [(0, 1), (2, 3)])
    assert check.clause == "not_bijection"
    assert check.detail == "6 unmapped"


def test_zero_in_target(z8):
    A, B = make_subset(z8, [1, 2]), make_subset(z8, [0, 3])
    check = is_matching(A, B, {1: 0, 2: 3})
    assert check.clause == "zero_in_B"


def test_preconditions(z8, z4):
    with pytest.raises(PreconditionError):
        find_matching(make_subset(z8, [1, 2]), make_subset(z8, [3]))
    with pytest.raises(PreconditionError):
        find_matching(make_subset(z8, [1]), make_subset(z8, [0]))
    with pytest.raises(GroupMismatchError):
        find_matching(make_subset(z8, [1]), make_subset(z4, [1]))


def test_negation_matching():
    G = make_group(0, [5])
    A = make_subset(G, [1, 2, 3, 4])
    result = find_matching(A, A)
    assert result.method == "negation"
    assert is_matching(A, A, result.pairs)


# ---------------------------------------------------------
# Hall violators
# ---------------------------------------------------------
def test_counterexample_has_hall_violator(z4, z4_counterexample):
    A, B = z4_counterexample
    result = find_matching(A, B)
    assert isinstance(result, HallViolator)
    assert result.S == make_subset(z4, [0, 2])
    assert result.U == make_subset(z4, [2])
    assert result.deficit == 1
    assert is_hall_violator(A, B, result.S, result.U)


def test_hall_violator_rejects_wrong_u(z4, z4_counterexample):
    A, B = z4_counterexample
    assert not is_hall_violator(A, B, make_subset(z4, [0, 2]), make_subset(z4, [1]))
    assert not is_hall_violator(A, B, make_subset(z4, []), make_subset(z4, [2]))


@given(cyclic_pairs(max_order=9))
@hsettings(max_examples=80, deadline=None)
def test_find_matching_agrees_with_bijection_oracle(data):
    G, A, B = data
    result = find_matching(A, B)
    oracle = brute_force_matching(A, B)
    assert isinstance(result, Matching) == (oracle is not None)
    if isinstance(result, HallViolator):
        assert is_hall_violator(A, B, result.S, result.U)
        assert result.deficit > 0


def test_bijection_oracle_budget(z8):
    A = make_subset(z8, range(1, 8))
    with pytest.raises(BudgetExceededError):
        brute_force_matching(A, A, limit=5)


# ---------------------------------------------------------
# Local matchings
# ---------------------------------------------------------
def test_single_qualifying_subgroup(z8, z8_pair):
    A, B = z8_pair
    report = is_locally_matched(A, B)
    assert report.ok
    assert len(report.traces) == 1
    trace = report.traces[0]
    assert trace.H.elements == make_subset(z8, [0, 4])
    assert trace.witness == z8.element(2)
    assert trace.local_matching.A_prime == make_subset(z8, [0])
    assert trace.local_matching.pairs == ((z8.element(0), z8.element(4)),)


def test_counterexample_is_not_locally_matched(z4, z4_counterexample):
    A, B = z4_counterexample
    report = is_locally_matched(A, B)
    assert not report
    assert report.first_failure.H.elements == make_subset(z4, [0, 2])


def test_local_matching_qualification(z8, z8_pair):
    A, B = z8_pair
    whole = subgroups(z8)[-1]
    with pytest.raises(QualificationError):
        find_local_matching(A, B, whole)
    with pytest.raises(QualificationError):
        # {0,2,4,6} + a ⊄ A for every a
        find_local_matching(A, B, subgroup_closure(z8, [2]))


@given(cyclic_pairs(max_order=10))
@hsettings(max_examples=100, deadline=None)
def test_locally_matched_implies_matched(data):
    G, A, B = data
    if is_locally_matched(A, B):
        assert isinstance(find_matching(A, B), Matching)


# ---------------------------------------------------------
# Matching property
# ---------------------------------------------------------
@pytest.mark.parametrize("free, torsion, expected", [
    (0, [5], True),
    (1, [], True),
    (2, [], True),
    (0, [8], False),
    (0, [2, 2], False),
    (1, [2], False),
])
def test_decide_matching_property(free, torsion, expected):
    assert decide_matching_property(make_group(free, torsion)) is expected


def test_construct_counterexample(z4):
    A, B = construct_counterexample(z4)
    assert A == make_subset(z4, [0, 2])
    assert B == make_subset(z4, [1, 2])
    assert construct_counterexample(make_group(0, [7])) is None


@pytest.mark.parametrize("torsion", [[6], [8], [9], [2, 2], [3, 9]])
def test_counterexamples_are_unmatched(torsion):
    G = make_group(0, torsion)
    A, B = construct_counterexample(G)
    assert len(A) == len(B)
    assert G.zero() not in B
    assert isinstance(find_matching(A, B), HallViolator)


def test_counterexample_in_mixed_group():
    G = make_group(1, [2])
    A, B = construct_counterexample(G)
    assert isinstance(find_matching(A, B), HallViolator)


@given(st.integers(min_value=2, max_value=16), st.data())
@hsettings(max_examples=60, deadline=None)
def test_generator_targets_are_matched(n, data):
    G = make_group(0, [n])
    gens = cyclic_generators(G)
    k = data.draw(st.integers(min_value=1, max_value=len(gens)))
    B = make_subset(G, data.draw(st.lists(st.sampled_from(gens), min_size=k, max_size=k, unique=True)))
    A = make_subset(G, data.draw(st.lists(st.integers(0, n - 1), min_size=k, max_size=k, unique=True)))
    assert isinstance(find_matching(A, B), Matching)


# ---------------------------------------------------------
# Kneser
# ---------------------------------------------------------
def test_kneser_tight_coset_pair():
    G = make_group(0, [12])
    cert = kneser_verify(make_subset(G, [0, 4, 8]), make_subset(G, [1, 5, 9]))
    assert cert.C == make_subset(G, [1, 5, 9])
    assert cert.H.order == 3
    assert cert.slack == 0


@given(cyclic_subsets(max_order=14))
@hsettings(max_examples=100, deadline=None)
def test_kneser_slack_is_nonnegative(data):
    G, A, B = data
    cert = kneser_verify(A, B)
    assert cert.slack >= 0
    assert cert.slack == len(cert.C) - len(A) - len(B) + cert.H.order
