# tests/test_linear_matching.py
import itertools

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from matchlab.errors import PreconditionError
from matchlab.ffext import (
    FqElement, make_field, random_basis, random_subspace, subfield, subspace_from_vectors,
)
from matchlab.linear_matching import (
    BasisMatching, BasisSeq, CriterionViolator, a_matched, basis_matchable,
    construct_linear_counterexample, criterion_witness, decide_linear_matching_property,
    find_matched_basis, is_matched, linear_locally_matched, local_implies_matched_check,
    make_basis, matched_basis_failure, primitive_check, search_matched_basis,
    strong_matching_check, strong_matching_exists,
)


# ---------------------------------------------------------
# Utility helpers
# ---------------------------------------------------------
def random_pair(ctx, seed, max_dim, avoid_one=False):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, max_dim + 1))
    A = random_subspace(ctx, m, rng)
    B = random_subspace(ctx, m, rng)
    while avoid_one and ctx.one in B:
        B = random_subspace(ctx, m, rng)
    return A, B, BasisSeq(ctx, random_basis(A, rng))


seeds = st.integers(min_value=0, max_value=2**31)


# ---------------------------------------------------------
# Bases
# ---------------------------------------------------------
def test_dependent_basis_rejected(f4):
    with pytest.raises(PreconditionError):
        make_basis(f4, [[1, 0], [1, 0]])


def test_basis_length_must_match(f16):
    A = subspace_from_vectors(f16, [[1, 0, 0, 0]])
    B = subspace_from_vectors(f16, [[0, 1, 0, 0], [0, 0, 1, 0]])
    with pytest.raises(PreconditionError):
        basis_matchable([[1, 0, 0, 0]], B, A)


def test_basis_must_span_a(f16):
    A = subspace_from_vectors(f16, [[1, 0, 0, 0], [0, 1, 0, 0]])
    B = subspace_from_vectors(f16, [[0, 0, 1, 0], [0, 0, 0, 1]])
    with pytest.raises(PreconditionError):
        basis_matchable([[1, 0, 0, 0], [0, 0, 1, 0]], B, A)


# ---------------------------------------------------------
# Dimension criterion and matched bases
# ---------------------------------------------------------
def test_line_matched_to_omega(f4, f4_lines):
    one, omega = f4_lines
    assert basis_matchable([[1, 0]], omega, one) is None
    result = find_matched_basis([[1, 0]], omega, one)
    assert isinstance(result, BasisMatching)
    assert result.b_basis.vectors == (FqElement((0, 1)),)


def test_line_against_itself_violates(f4, f4_lines):
    one, _ = f4_lines
    violator = basis_matchable([[1, 0]], one, one)
    assert isinstance(violator, CriterionViolator)
    assert violator.J == (1,)
    assert violator.witness_space == one
    assert violator.deficit == 1
    assert criterion_witness(violator.a_basis, one, one, violator.J) == one
    assert isinstance(find_matched_basis([[1, 0]], one, one), CriterionViolator)


def test_matched_basis_failure_names_the_product(f4, f4_lines):
    one, _ = f4_lines
    a_basis = make_basis(f4, [[1, 0]])
    assert matched_basis_failure(a_basis, a_basis, one) == "a_1*b_1 ∈ A"


@given(seeds, st.sampled_from([(2, 3), (3, 2), (2, 4)]))
@hsettings(max_examples=60, deadline=None)
def test_criterion_agrees_with_exhaustive_search(seed, field):
    ctx = make_field(*field)
    A, B, a_basis = random_pair(ctx, seed, min(ctx.n, 3))
    violator = basis_matchable(a_basis, B, A)
    found = search_matched_basis(a_basis, B, A)
    assert (violator is None) == (found is not None)
    if violator is None:
        matching = find_matched_basis(a_basis, B, A)
        assert matching.b_basis.span() == B
        assert matched_basis_failure(a_basis, matching.b_basis, A) is None


@given(seeds, st.sampled_from([(2, 3), (3, 2), (2, 4)]))
@hsettings(max_examples=40, deadline=None)
def test_canonical_witness_is_the_first_exhaustive_match(seed, field):
    ctx = make_field(*field)
    A, B, a_basis = random_pair(ctx, seed, min(ctx.n, 3))
    result = find_matched_basis(a_basis, B, A, canonical=True)
    found = search_matched_basis(a_basis, B, A)
    if isinstance(result, CriterionViolator):
        assert found is None
    else:
        assert result.method == "exhaustive"
        assert result.b_basis.vectors == found.b_basis.vectors
        assert matched_basis_failure(a_basis, result.b_basis, A) is None


@given(seeds, st.sampled_from([(2, 3), (3, 2), (2, 4)]))
@hsettings(max_examples=40, deadline=None)
def test_intersection_dimension_is_monotone_in_j(seed, field):
    ctx = make_field(*field)
    A, B, a_basis = random_pair(ctx, seed, min(ctx.n, 3))
    n = len(a_basis)
    index_sets = [J for size in range(n + 1) for J in itertools.combinations(range(1, n + 1), size)]
    dims = {J: criterion_witness(a_basis, B, A, J).dim for J in index_sets}
    assert dims[()] == B.dim
    for J, K in itertools.product(index_sets, repeat=2):
        if set(J) <= set(K):
            assert dims[J] >= dims[K], (J, K)
    violator = basis_matchable(a_basis, B, A)
    if violator is not None:
        assert dims[violator.J] == violator.witness_space.dim


# ---------------------------------------------------------
# Matched subspaces
# ---------------------------------------------------------
def test_is_matched_exhaustive(f4_lines):
    one, omega = f4_lines
    report = is_matched(one, omega)
    assert report.ok
    assert report.examined == 1
    assert report.seed is None


def test_is_matched_sample_records_seed(f16):
    A = subspace_from_vectors(f16, [[1, 0, 0, 0], [0, 1, 0, 0]])
    B = subspace_from_vectors(f16, [[0, 0, 1, 0], [0, 0, 0, 1]])
    report = is_matched(A, B, mode="sample", trials=5, seed=11)
    assert report.mode == "sample"
    assert report.seed == 11
    with pytest.raises(PreconditionError):
        is_matched(A, B, mode="bogus")


def test_dimension_mismatch(f16):
    A = subspace_from_vectors(f16, [[1, 0, 0, 0]])
    B = subspace_from_vectors(f16, [[0, 1, 0, 0], [0, 0, 1, 0]])
    with pytest.raises(PreconditionError):
        is_matched(A, B)


def test_strong_matching(f4_lines):
    one, omega = f4_lines
    assert strong_matching_exists(one, omega)
    assert not strong_matching_exists(one, one)
    report = strong_matching_check(one, omega, mode="exhaustive")
    assert report.strong
    assert report.matched.ok
    assert report.local.ok
    assert not report.finding
    assert not strong_matching_check(one, one).strong


@given(seeds)
@hsettings(max_examples=30, deadline=None)
def test_strong_pairs_are_matched(seed):
    ctx = make_field(2, 4)
    A, B, _ = random_pair(ctx, seed, 2)
    if strong_matching_exists(A, B):
        assert is_matched(A, B, mode="exhaustive").ok


# ---------------------------------------------------------
# Primitive subspaces
# ---------------------------------------------------------
def test_primitive_check(f4_lines, f16):
    one, omega = f4_lines
    assert primitive_check(omega)
    report = primitive_check(one)
    assert not report
    assert report.offender.d == 1
    assert not primitive_check(subfield(f16, 2).space)


@given(seeds)
@hsettings(max_examples=40, deadline=None)
def test_primitive_targets_are_matched(seed):
    ctx = make_field(2, 4)
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 3))
    B = random_subspace(ctx, m, rng)
    if not primitive_check(B):
        return
    A = random_subspace(ctx, m, rng)
    assert basis_matchable(BasisSeq(ctx, random_basis(A, rng)), B, A) is None


# ---------------------------------------------------------
# Local matchings
# ---------------------------------------------------------
def test_a_matched_rules(f4, f4_lines):
    one, omega = f4_lines
    for rule in ("definition", "criterion"):
        assert a_matched([[1, 0]], omega, one, rule=rule)
        assert not a_matched([[1, 0]], one, one, rule=rule)
    assert a_matched([[1, 0]], omega, one, mode="all_bases")
    with pytest.raises(PreconditionError):
        a_matched([[1, 0]], omega, one, rule="bogus")


def test_no_qualifying_subfield_is_locally_matched(f4_lines):
    one, omega = f4_lines
    report = linear_locally_matched(one, omega)
    assert report.ok
    assert report.traces == ()


def test_one_in_b_rejected(f4_lines):
    one, _ = f4_lines
    with pytest.raises(PreconditionError):
        linear_locally_matched(one, one)


def test_linear_counterexample(f16):
    A, B = construct_linear_counterexample(f16)
    assert A == subfield(f16, 2).space
    assert f16.one not in B
    assert basis_matchable(BasisSeq(f16, A.basis), B, A) is not None
    report = linear_locally_matched(A, B)
    assert not report
    assert report.first_failure.H.d == 2
    assert not is_matched(A, B).ok


@pytest.mark.parametrize("p, n, expected", [(2, 1, True), (2, 2, True), (2, 4, False), (2, 5, True), (3, 4, False)])
def test_decide_linear_matching_property(p, n, expected):
    ctx = make_field(p, n)
    assert decide_linear_matching_property(ctx) is expected
    assert (construct_linear_counterexample(ctx) is None) is expected


@given(seeds)
@hsettings(max_examples=25, deadline=None)
def test_locally_matched_implies_matched(seed):
    ctx = make_field(2, 4)
    A, B, _ = random_pair(ctx, seed, 2, avoid_one=True)
    report = local_implies_matched_check(A, B, mode="exhaustive")
    assert report.implication_holds
