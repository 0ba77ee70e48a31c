# Shared fixtures: small groups and fields with hand-checked pairs
import pytest
from hypothesis import strategies as st

from matchlab.abelian import make_group, make_subset
from matchlab.config import Settings
from matchlab.ffext import make_field, subspace_from_vectors


# ---------------------------------------------------------
# Groups
# ---------------------------------------------------------
@pytest.fixture
def z8():
    return make_group(0, [8])


@pytest.fixture
def z8_pair(z8):
    """A = {0,2,6}, B = {1,3,4}: matched, one qualifying subgroup {0,4}"""
    return make_subset(z8, [0, 2, 6]), make_subset(z8, [1, 3, 4])


@pytest.fixture
def z4():
    return make_group(0, [4])


@pytest.fixture
def z4_counterexample(z4):
    return make_subset(z4, [0, 2]), make_subset(z4, [1, 2])


# ---------------------------------------------------------
# Fields
# ---------------------------------------------------------
@pytest.fixture
def f4():
    return make_field(2, 2)


@pytest.fixture
def f16():
    return make_field(2, 4)


@pytest.fixture
def f4_lines(f4):
    """<1> and <t> in F_4"""
    return subspace_from_vectors(f4, [[1, 0]]), subspace_from_vectors(f4, [[0, 1]])


@pytest.fixture
def settings():
    """Defaults without reading .matchlab/config.toml"""
    return Settings(progress_every=0)


# ---------------------------------------------------------
# Strategies
# ---------------------------------------------------------
small_cyclic_orders = st.integers(min_value=2, max_value=12)


@st.composite
def cyclic_pairs(draw, max_order=10):
    """(G, A, B) with #A = #B and 0 not in B, G = Z/n"""
    n = draw(st.integers(min_value=2, max_value=max_order))
    G = make_group(0, [n])
    k = draw(st.integers(min_value=1, max_value=n - 1))
    A = draw(st.lists(st.integers(0, n - 1), min_size=k, max_size=k, unique=True))
    B = draw(st.lists(st.integers(1, n - 1), min_size=k, max_size=k, unique=True))
    return G, make_subset(G, A), make_subset(G, B)


@st.composite
def cyclic_subsets(draw, max_order=12):
    """(G, A, B), arbitrary nonempty subsets of G = Z/n"""
    n = draw(st.integers(min_value=2, max_value=max_order))
    G = make_group(0, [n])
    A = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    B = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    return G, make_subset(G, A), make_subset(G, B)


@st.composite
def cyclic_triples(draw, max_order=12):
    """(G, A, B, C), arbitrary nonempty subsets of G = Z/n"""
    G, A, B = draw(cyclic_subsets(max_order))
    n = G.order
    C = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    return G, A, B, make_subset(G, C)
