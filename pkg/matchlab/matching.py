"""
Matchings and Local Matchings in Abelian Groups
Bipartite matching between finite subsets, Hall violators, local matchings,
the matching property and Kneser certificates
"""
import itertools
import logging
from dataclasses import dataclass

import galois
import networkx as nx

from matchlab.abelian import (
    GroupElement, GroupSpec, GroupSubset, Subgroup,
    _add, _neg, make_subset, stabilizer, subgroup_closure, subgroups, sumset,
    torsion_elements,
)
from matchlab.config import BUDGETS
from matchlab.errors import (
    BudgetExceededError, GroupMismatchError, PreconditionError,
    QualificationError, TheoremViolation,
)

logger = logging.getLogger(__name__)


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True)
class Matching:
    """Bijection A -> B with 0 not in B and a + f(a) not in A, pairs sorted by a"""

    A: GroupSubset
    B: GroupSubset
    pairs: tuple
    method: str = "hopcroft-karp"

    def as_dict(self) -> dict:
        return dict(self.pairs)


@dataclass(frozen=True)
class LocalMatching:
    """Bijection A' -> H ∩ B for one qualifying subgroup H with witness a0 + H ⊆ A"""

    H: Subgroup
    witness: GroupElement
    A_prime: GroupSubset
    pairs: tuple


@dataclass(frozen=True)
class HallViolator:
    """S ⊆ A with U = {b in B : s + b in A for all s in S} and #(B \\ U) < #S"""

    A: GroupSubset
    B: GroupSubset
    S: GroupSubset
    U: GroupSubset

    @property
    def deficit(self) -> int:
        return len(self.S) - (len(self.B) - len(self.U))


@dataclass(frozen=True)
class KneserCertificate:
    A: GroupSubset
    B: GroupSubset
    C: GroupSubset
    H: Subgroup
    slack: int


@dataclass(frozen=True)
class MatchingCheck:
    """Outcome of is_matching; clause and element name the first failure"""

    ok: bool
    clause: str = None
    element: GroupElement = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SubgroupTrace:
    """One qualifying subgroup of a local-matching decision"""

    H: Subgroup
    witness: GroupElement
    intersection: GroupSubset
    local_matching: LocalMatching = None

    @property
    def ok(self) -> bool:
        return self.local_matching is not None


@dataclass(frozen=True)
class LocalReport:
    A: GroupSubset
    B: GroupSubset
    traces: tuple

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.traces)

    @property
    def first_failure(self):
        return next((t for t in self.traces if not t.ok), None)

    def __bool__(self) -> bool:
        return self.ok


# =============================================================================
# PRECONDITIONS
# =============================================================================

def _check_same_group(A: GroupSubset, B: GroupSubset) -> GroupSpec:
    if A.group != B.group:
        raise GroupMismatchError(f"A lives in {A.group}, B in {B.group}")
    return A.group


def _check_pair(A: GroupSubset, B: GroupSubset) -> GroupSpec:
    group = _check_same_group(A, B)
    if len(A) != len(B):
        raise PreconditionError(f"#A = {len(A)} but #B = {len(B)}")
    if not len(A):
        raise PreconditionError("A and B must be nonempty")
    if group.zero() in B:
        raise PreconditionError("0 must not belong to B")
    return group


# =============================================================================
# CHECKING
# =============================================================================

def is_matching(A: GroupSubset, B: GroupSubset, pairs) -> MatchingCheck:
    """
    Check that pairs is a matching from A to B.

    Args:
        pairs: mapping a -> b or sequence of (a, b)

    Returns:
        MatchingCheck with the failing clause ("zero_in_B", "not_bijection",
        "sum_in_A") and the offending element on failure
    """
    group = _check_same_group(A, B)
    if len(A) != len(B):
        raise PreconditionError(f"#A = {len(A)} but #B = {len(B)}")

    items = list(pairs.items()) if isinstance(pairs, dict) else list(pairs)
    items = [(group.element(a), group.element(b)) for a, b in items]

    zero = group.zero()
    if zero in B:
        return MatchingCheck(False, "zero_in_B", zero, "0∈B")

    seen_a, seen_b = set(), set()
    for a, b in items:
        if a not in A:
            return MatchingCheck(False, "not_bijection", a, f"{a}∉A")
        if b not in B:
            return MatchingCheck(False, "not_bijection", b, f"{b}∉B")
        if a in seen_a:
            return MatchingCheck(False, "not_bijection", a, f"{a} mapped twice")
        if b in seen_b:
            return MatchingCheck(False, "not_bijection", b, f"{b} hit twice")
        seen_a.add(a)
        seen_b.add(b)
    missing = [a for a in A if a not in seen_a]
    if missing:
        return MatchingCheck(False, "not_bijection", missing[0], f"{missing[0]} unmapped")

    for a, b in sorted(items):
        s = _add(group, a, b)
        if s in A:
            return MatchingCheck(False, "sum_in_A", a, f"{a}+{b}={s}∈A")

    return MatchingCheck(True)


def hall_neighbourhood(S, B: GroupSubset, A: GroupSubset) -> GroupSubset:
    """B \\ U: targets b with s + b not in A for some s in S"""
    group = A.group
    return GroupSubset(group, tuple(b for b in B if any(_add(group, s, b) not in A for s in S)))


def hall_unusable(S, B: GroupSubset, A: GroupSubset) -> GroupSubset:
    """U = {b in B : s + b in A for all s in S}"""
    group = A.group
    return GroupSubset(group, tuple(b for b in B if all(_add(group, s, b) in A for s in S)))


def is_hall_violator(A: GroupSubset, B: GroupSubset, S, U) -> bool:
    if not S or any(s not in A for s in S):
        return False
    expected = hall_unusable(S, B, A)
    return tuple(expected) == tuple(U) and len(B) - len(U) < len(S)


# =============================================================================
# MATCHING
# =============================================================================

def _matching_graph(A: GroupSubset, left, right) -> nx.Graph:
    """
    Bipartite graph with integer nodes: left[i] -> i, right[j] -> len(left) + j.
    Edge a -- b iff a + b not in A.
    """
    group = A.group
    offset = len(left)
    graph = nx.Graph()
    graph.add_nodes_from(range(offset), bipartite=0)
    graph.add_nodes_from(range(offset, offset + len(right)), bipartite=1)
    for i, a in enumerate(left):
        for j, b in enumerate(right):
            if _add(group, a, b) not in A:
                graph.add_edge(i, offset + j)
    return graph


def _maximum_matching(graph: nx.Graph, n_left: int) -> dict:
    """left index -> right index (already shifted back)"""
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=range(n_left))
    return {u: v - n_left for u, v in matching.items() if u < n_left}


def negation_matching(A: GroupSubset, B: GroupSubset):
    """a -> -a when A = B = G \\ {0} for a finite G, else None"""
    group = A.group
    if not group.is_finite or B.group != group:
        return None
    if len(A) != group.order - 1 or A.elements != B.elements or group.zero() in A:
        return None
    pairs = tuple((a, _neg(group, a)) for a in A)
    return Matching(A, B, pairs, method="negation")


def find_matching(A: GroupSubset, B: GroupSubset):
    """
    Matching from A to B, or the Hall violator that rules one out.

    Augmenting-path maximum matching on a -- b iff a + b not in A; on a deficit,
    S is read off the König cover of the maximum matching and shrunk greedily.

    Returns:
        Matching | HallViolator
    """
    _check_pair(A, B)

    fast = negation_matching(A, B)
    if fast is not None:
        return fast

    left, right = A.elements, B.elements
    graph = _matching_graph(A, left, right)
    matched = _maximum_matching(graph, len(left))

    if len(matched) == len(left):
        pairs = tuple((left[i], right[matched[i]]) for i in range(len(left)))
        result = Matching(A, B, pairs)
        check = is_matching(A, B, pairs)
        if not check:
            raise TheoremViolation(f"constructed matching fails: {check.detail}")
        return result

    return _hall_violator(A, B, graph, len(left))


def _hall_violator(A: GroupSubset, B: GroupSubset, graph: nx.Graph, n_left: int) -> HallViolator:
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=range(n_left))
    cover = nx.bipartite.to_vertex_cover(graph, matching, top_nodes=range(n_left))
    S = [A.elements[i] for i in range(n_left) if i not in cover]

    # Shrink to a minimal violating set, canonical order
    for s in list(S):
        trial = [x for x in S if x != s]
        if trial and len(hall_neighbourhood(trial, B, A)) < len(trial):
            S = trial

    S = GroupSubset(A.group, tuple(sorted(S)))
    U = hall_unusable(S, B, A)
    if not is_hall_violator(A, B, S, U):
        raise TheoremViolation(
            f"no perfect matching but extracted S={S} is not a Hall violator",
            context={"A": A, "B": B},
        )
    return HallViolator(A, B, S, U)


def brute_force_matching(A: GroupSubset, B: GroupSubset, limit: int = None):
    """First matching over all bijections in canonical order, or None"""
    group = _check_pair(A, B)
    limit = BUDGETS["bijection_oracle_limit"] if limit is None else limit
    if len(A) > limit:
        raise BudgetExceededError(f"bijection oracle limited to #A <= {limit}, got {len(A)}")
    for images in itertools.permutations(B.elements):
        if all(_add(group, a, b) not in A for a, b in zip(A.elements, images)):
            return Matching(A, B, tuple(zip(A.elements, images)), method="brute-force")
    return None


# =============================================================================
# LOCAL MATCHINGS
# =============================================================================

def _coset_witness(A: GroupSubset, H: Subgroup):
    """First a in A with a + H ⊆ A"""
    group = A.group
    for a in A:
        if all(_add(group, a, h) in A for h in H.elements):
            return a
    return None


def find_local_matching(A: GroupSubset, B: GroupSubset, H: Subgroup):
    """
    Local matching for one subgroup.

    Raises:
        QualificationError: H is not proper, misses B, or has no coset inside A

    Returns:
        LocalMatching saturating H ∩ B, or None
    """
    group = _check_same_group(A, B)
    if H.group != group:
        raise GroupMismatchError(f"H lives in {H.group}, A in {group}")
    if not H.is_proper:
        raise QualificationError(f"{H} is not a proper subgroup")
    target = B.intersection(H.elements)
    if not len(target):
        raise QualificationError(f"H ∩ B is empty for H={H}")
    witness = _coset_witness(A, H)
    if witness is None:
        raise QualificationError(f"no a in A with a+H ⊆ A for H={H}")

    left = A.elements
    right = target.elements
    graph = _matching_graph(A, left, right)
    matched = _maximum_matching(graph, len(left))
    if len(matched) < len(right):
        return None

    pairs = tuple(sorted((left[i], right[j]) for i, j in matched.items()))
    A_prime = GroupSubset(group, tuple(a for a, _ in pairs))
    return LocalMatching(H, witness, A_prime, pairs)


def is_locally_matched(A: GroupSubset, B: GroupSubset) -> LocalReport:
    """
    Local matchings for every qualifying subgroup.

    Qualifying: proper, #H <= #A, H ∩ B nonempty, a + H ⊆ A for some a.
    The report is truthy iff each qualifying subgroup admits a local matching.
    """
    group = _check_pair(A, B)
    traces = []
    for H in subgroups(group, order_bound=len(A)):
        target = B.intersection(H.elements)
        if not len(target):
            continue
        witness = _coset_witness(A, H)
        if witness is None:
            continue
        if not H.is_proper:
            raise TheoremViolation(f"qualifying subgroup equals the whole group {group}")
        local = find_local_matching(A, B, H)
        traces.append(SubgroupTrace(H, witness, target, local))
        logger.debug("H=%s witness=%s local=%s", H, witness, local is not None)
    return LocalReport(A, B, tuple(traces))


# =============================================================================
# MATCHING PROPERTY
# =============================================================================

def decide_matching_property(group: GroupSpec) -> bool:
    """Torsion-free, or cyclic of prime order"""
    if not group.torsion_orders:
        return True
    return (group.free_rank == 0 and len(group.torsion_orders) == 1
            and galois.is_prime(group.torsion_orders[0]))


def first_element_outside(group: GroupSpec, H: Subgroup) -> GroupElement:
    """Torsion elements in canonical order, then free unit vectors"""
    for x in torsion_elements(group):
        if x not in H:
            return x
    for i in range(group.free_rank):
        unit = tuple(1 if j == i else 0 for j in range(group.free_rank))
        candidate = GroupElement(unit, (0,) * len(group.torsion_orders))
        if candidate not in H:
            return candidate
    raise PreconditionError(f"{H} is all of {group}")


def counterexample_subgroup(group: GroupSpec) -> Subgroup:
    """⟨(n1/p)e1⟩, p the smallest prime dividing n1"""
    n1 = group.torsion_orders[0]
    p = int(galois.factors(n1)[0][0])
    torsion = (n1 // p,) + (0,) * (len(group.torsion_orders) - 1)
    generator = GroupElement((0,) * group.free_rank, torsion)
    return subgroup_closure(group, [generator])


def construct_counterexample(group: GroupSpec, oracle_limit: int = None):
    """
    Unmatchable pair A = H, B = (H \\ {0}) ∪ {g}, or None when G has the matching property.

    The pair is checked with find_matching and, when small enough, the bijection oracle.
    """
    if decide_matching_property(group):
        return None

    H = counterexample_subgroup(group)
    g = first_element_outside(group, H)
    A = H.elements
    B = make_subset(group, [h for h in H.elements if not h.is_zero] + [g])

    result = find_matching(A, B)
    if isinstance(result, Matching):
        raise TheoremViolation(f"constructed counterexample in {group} is matched", context={"A": A, "B": B})
    limit = BUDGETS["bijection_oracle_limit"] if oracle_limit is None else oracle_limit
    if len(A) <= limit and brute_force_matching(A, B, limit) is not None:
        raise TheoremViolation(f"bijection oracle matches the counterexample in {group}", context={"A": A, "B": B})

    logger.debug("Counterexample in %s: A=%s B=%s", group, A, B)
    return A, B


# =============================================================================
# KNESER
# =============================================================================

def kneser_verify(A: GroupSubset, B: GroupSubset) -> KneserCertificate:
    """#(A+B) >= #A + #B - #H with H the stabilizer of A+B; raises on negative slack"""
    C = sumset(A, B)
    H = stabilizer(C)
    slack = len(C) - len(A) - len(B) + H.order
    if slack < 0:
        raise TheoremViolation(
            f"Kneser inequality fails: #C={len(C)} #A={len(A)} #B={len(B)} #H={H.order}",
            context={"A": A, "B": B},
        )
    return KneserCertificate(A, B, C, H, slack)
