"""
Finitely Generated Abelian Groups
Z^r x Z/n1 x ... x Z/nk in invariant-factor form, canonical elements,
finite subsets, subgroups, sumsets and stabilizers
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache

import galois

from matchlab.errors import GroupMismatchError, PreconditionError

logger = logging.getLogger(__name__)


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True, order=True)
class GroupElement:
    """Element in canonical residue form; ordering is lexicographic on components"""

    free_part: tuple = ()
    torsion_part: tuple = ()

    @property
    def is_zero(self) -> bool:
        return not any(self.free_part) and not any(self.torsion_part)

    def components(self) -> tuple:
        return self.free_part + self.torsion_part

    def __str__(self) -> str:
        parts = self.components()
        if len(parts) == 1:
            return str(parts[0])
        return "(" + ",".join(str(c) for c in parts) + ")"


@dataclass(frozen=True, order=True)
class GroupSpec:
    """Z^free_rank x Z/n1 x ... x Z/nk with n1 | n2 | ... | nk"""

    free_rank: int = 0
    torsion_orders: tuple = ()

    @property
    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self):
        """Number of elements, math.inf for infinite groups"""
        if not self.is_finite:
            return math.inf
        return math.prod(self.torsion_orders)

    @property
    def is_cyclic(self) -> bool:
        return self.is_finite and len(self.torsion_orders) <= 1

    def zero(self) -> GroupElement:
        return GroupElement((0,) * self.free_rank, (0,) * len(self.torsion_orders))

    def contains(self, x: GroupElement) -> bool:
        if not isinstance(x, GroupElement):
            return False
        if len(x.free_part) != self.free_rank or len(x.torsion_part) != len(self.torsion_orders):
            return False
        return all(0 <= t < n for t, n in zip(x.torsion_part, self.torsion_orders))

    def check(self, x: GroupElement) -> GroupElement:
        """Raise GroupMismatchError unless x is a canonical element of this group"""
        if not self.contains(x):
            raise GroupMismatchError(f"{x} is not an element of {self}")
        return x

    def element(self, value) -> GroupElement:
        """
        Coerce a value into a canonical element.

        Accepts a GroupElement, an int (groups with a single component),
        a flat sequence of r + k integers, or a {"free": [...], "torsion": [...]} dict.
        Residues are reduced; a GroupElement is only checked.
        """
        if isinstance(value, GroupElement):
            return self.check(value)
        if isinstance(value, dict):
            free = tuple(int(v) for v in value.get("free", []))
            torsion = tuple(int(v) for v in value.get("torsion", []))
        else:
            if isinstance(value, (int,)) and not isinstance(value, bool):
                components = (int(value),)
            else:
                components = tuple(int(v) for v in value)
            if len(components) != self.free_rank + len(self.torsion_orders):
                raise GroupMismatchError(f"{value!r} has the wrong number of components for {self}")
            free = components[:self.free_rank]
            torsion = components[self.free_rank:]
        if len(free) != self.free_rank or len(torsion) != len(self.torsion_orders):
            raise GroupMismatchError(f"{value!r} has the wrong shape for {self}")
        torsion = tuple(t % n for t, n in zip(torsion, self.torsion_orders))
        return GroupElement(free, torsion)

    def __str__(self) -> str:
        parts = []
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        parts.extend(f"Z/{n}" for n in self.torsion_orders)
        return " x ".join(parts) if parts else "0"


@dataclass(frozen=True)
class GroupSubset:
    """Finite duplicate-free subset, elements kept sorted"""

    group: GroupSpec
    elements: tuple
    _members: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_members", frozenset(self.elements))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x) -> bool:
        return x in self._members

    @property
    def members(self) -> frozenset:
        return self._members

    def intersection(self, other) -> "GroupSubset":
        return GroupSubset(self.group, tuple(x for x in self.elements if x in other))

    def difference(self, other) -> "GroupSubset":
        return GroupSubset(self.group, tuple(x for x in self.elements if x not in other))

    def union(self, other) -> "GroupSubset":
        return make_subset(self.group, self._members | set(other))

    def issubset(self, other) -> bool:
        return all(x in other for x in self.elements)

    def __str__(self) -> str:
        return "{" + ",".join(str(x) for x in self.elements) + "}"


@dataclass(frozen=True)
class Subgroup:
    """Finite subgroup with its generators and materialized elements"""

    group: GroupSpec
    generators: tuple
    elements: GroupSubset

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def is_trivial(self) -> bool:
        return self.order == 1

    @property
    def is_proper(self) -> bool:
        return self.order < self.group.order

    def __contains__(self, x) -> bool:
        return x in self.elements

    def __str__(self) -> str:
        return str(self.elements)


# =============================================================================
# CONSTRUCTION
# =============================================================================

def _invariant_factors(orders) -> tuple:
    """Regroup prime-power parts of the orders into n1 | n2 | ... | nk"""
    prime_powers = {}
    for n in orders:
        primes, exponents = galois.factors(n)
        for p, e in zip(primes, exponents):
            prime_powers.setdefault(int(p), []).append(int(p) ** int(e))

    if not prime_powers:
        return ()

    length = max(len(powers) for powers in prime_powers.values())
    factors = [1] * length
    for powers in prime_powers.values():
        powers.sort(reverse=True)
        for i, q in enumerate(powers):
            factors[length - 1 - i] *= q
    return tuple(factors)


def make_group(free_rank: int, torsion_orders=()) -> GroupSpec:
    """
    Build a group in normalized invariant-factor form.

    Args:
        free_rank: r >= 0
        torsion_orders: orders n_i >= 2 of the cyclic factors, in any arrangement

    Returns:
        GroupSpec, e.g. (0, [2, 3]) -> Z/6 and (0, [4, 2]) -> Z/2 x Z/4
    """
    if int(free_rank) != free_rank or free_rank < 0:
        raise PreconditionError(f"free rank must be a non-negative integer, got {free_rank!r}")
    orders = [int(n) for n in torsion_orders]
    for n in orders:
        if n < 2:
            raise PreconditionError(f"torsion order must be >= 2, got {n}")
    return GroupSpec(int(free_rank), _invariant_factors(orders))


def make_subset(group: GroupSpec, items) -> GroupSubset:
    """Canonical subset from any iterable of coercible values"""
    elements = {group.element(x) for x in items}
    return GroupSubset(group, tuple(sorted(elements)))


@lru_cache(maxsize=None)
def group_elements(group: GroupSpec) -> tuple:
    """All elements of a finite group in canonical order"""
    if not group.is_finite:
        raise PreconditionError(f"{group} is infinite")
    return tuple(
        GroupElement((), torsion)
        for torsion in itertools.product(*(range(n) for n in group.torsion_orders))
    )


@lru_cache(maxsize=None)
def torsion_elements(group: GroupSpec) -> tuple:
    """Elements of finite order (free part zero), canonical order"""
    free = (0,) * group.free_rank
    return tuple(
        GroupElement(free, torsion)
        for torsion in itertools.product(*(range(n) for n in group.torsion_orders))
    )


# =============================================================================
# ARITHMETIC
# =============================================================================

def _add(group: GroupSpec, x: GroupElement, y: GroupElement) -> GroupElement:
    return GroupElement(
        tuple(a + b for a, b in zip(x.free_part, y.free_part)),
        tuple((a + b) % n for a, b, n in zip(x.torsion_part, y.torsion_part, group.torsion_orders)),
    )


def _neg(group: GroupSpec, x: GroupElement) -> GroupElement:
    return GroupElement(
        tuple(-a for a in x.free_part),
        tuple((-a) % n for a, n in zip(x.torsion_part, group.torsion_orders)),
    )


def _sub(group: GroupSpec, x: GroupElement, y: GroupElement) -> GroupElement:
    return _add(group, x, _neg(group, y))


def element_op(group: GroupSpec, kind: str, x: GroupElement = None, y: GroupElement = None) -> GroupElement:
    """
    Group arithmetic with operand checks.

    kind is one of "add", "neg", "zero"; operands are coerced with group.element.
    """
    if kind == "zero":
        return group.zero()
    if x is None:
        raise PreconditionError(f"'{kind}' needs an operand")
    x = group.element(x)
    if kind == "neg":
        return _neg(group, x)
    if kind == "add":
        if y is None:
            raise PreconditionError("'add' needs two operands")
        return _add(group, x, group.element(y))
    raise PreconditionError(f"Unknown element operation '{kind}'")


def _same_group(*subsets) -> GroupSpec:
    group = subsets[0].group
    for s in subsets[1:]:
        if s.group != group:
            raise GroupMismatchError(f"subsets live in {group} and {s.group}")
    return group


def sumset(A: GroupSubset, B: GroupSubset) -> GroupSubset:
    """C = A + B = {a + b : a in A, b in B}"""
    group = _same_group(A, B)
    if not len(A) or not len(B):
        raise PreconditionError("sumset of an empty set")
    return GroupSubset(group, tuple(sorted({_add(group, a, b) for a in A for b in B})))


def translate(C: GroupSubset, g: GroupElement) -> GroupSubset:
    """g + C"""
    return GroupSubset(C.group, tuple(sorted(_add(C.group, g, c) for c in C)))


# =============================================================================
# SUBGROUPS
# =============================================================================

def cyclic_subgroup_elements(group: GroupSpec, g: GroupElement) -> list:
    """Multiples of a torsion element g, starting at 0"""
    if any(g.free_part):
        raise PreconditionError(f"{g} has infinite order")
    multiples = [group.zero()]
    current = g
    while not current.is_zero:
        multiples.append(current)
        current = _add(group, current, g)
    return multiples


def _join(group: GroupSpec, members: frozenset, g: GroupElement) -> frozenset:
    """Subgroup generated by a subgroup (as element set) and one more element"""
    return frozenset(_add(group, h, m) for h in members for m in cyclic_subgroup_elements(group, g))


def _generating_set(group: GroupSpec, elements) -> tuple:
    """Greedy generators in canonical order"""
    generators = []
    span = frozenset([group.zero()])
    for x in sorted(elements):
        if x not in span:
            generators.append(x)
            span = _join(group, span, x)
    return tuple(generators)


def _as_subgroup(group: GroupSpec, members, generators=None) -> Subgroup:
    subset = GroupSubset(group, tuple(sorted(members)))
    if generators is None:
        generators = _generating_set(group, subset.elements)
    return Subgroup(group, tuple(generators), subset)


def subgroup_closure(group: GroupSpec, generators) -> Subgroup:
    """Subgroup generated by finitely many torsion elements"""
    span = frozenset([group.zero()])
    gens = [group.element(g) for g in generators]
    for g in gens:
        span = _join(group, span, g)
    return _as_subgroup(group, span, tuple(gens))


def stabilizer(C: GroupSubset) -> Subgroup:
    """
    H = {g : g + C = C} for a finite nonempty C.

    g + C = C forces g in C - c for every c, so the candidates are C - c0.
    """
    if not len(C):
        raise PreconditionError("stabilizer of an empty set")
    group = C.group
    c0 = C.elements[0]
    members = C.members
    found = []
    for c in C:
        g = _sub(group, c, c0)
        if all(_add(group, g, x) in members for x in C):
            found.append(g)
    return _as_subgroup(group, found)


@lru_cache(maxsize=None)
def _subgroup_table(group: GroupSpec, order_bound) -> tuple:
    zero = frozenset([group.zero()])
    found = {zero: _as_subgroup(group, zero, ())}
    frontier = [zero]
    candidates = torsion_elements(group)

    # Saturate: every subgroup is a join of a smaller one with a cyclic subgroup
    while frontier:
        next_frontier = []
        for members in frontier:
            parent = found[members]
            for g in candidates:
                if g in members:
                    continue
                joined = _join(group, members, g)
                if order_bound is not None and len(joined) > order_bound:
                    continue
                if joined in found:
                    continue
                found[joined] = _as_subgroup(group, joined, parent.generators + (g,))
                next_frontier.append(joined)
        frontier = next_frontier

    return tuple(sorted(found.values(), key=lambda H: (H.order, H.elements.elements)))


def subgroups(group: GroupSpec, order_bound: int = None) -> list:
    """
    All finite subgroups, each materialized, sorted by (order, elements).

    Infinite groups need order_bound; their finite subgroups live in the torsion part.
    """
    if not group.is_finite and order_bound is None:
        raise PreconditionError(f"{group} is infinite; pass an order bound")
    return list(_subgroup_table(group, order_bound))


def smallest_subgroup_order(group: GroupSpec):
    """n(G): smallest order of a non-zero subgroup, math.inf when torsion-free"""
    primes = set()
    for n in group.torsion_orders:
        primes.update(int(p) for p in galois.factors(n)[0])
    return min(primes) if primes else math.inf


def cyclic_generators(group: GroupSpec) -> list:
    """Generators of a finite cyclic group"""
    if not group.is_cyclic or not group.torsion_orders:
        raise PreconditionError(f"{group} is not a non-trivial finite cyclic group")
    n = group.torsion_orders[0]
    return [GroupElement((), (x,)) for x in range(n) if math.gcd(x, n) == 1]


# =============================================================================
# ENUMERATION AND SAMPLING
# =============================================================================

def _partitions(e: int, largest: int = None):
    """Integer partitions of e as non-increasing tuples"""
    if largest is None:
        largest = e
    if e == 0:
        yield ()
        return
    for first in range(min(e, largest), 0, -1):
        for rest in _partitions(e - first, first):
            yield (first,) + rest


def groups_of_order(n: int) -> list:
    """Every abelian group of order n up to isomorphism, sorted by invariant factors"""
    if n == 1:
        return [GroupSpec(0, ())]
    primes, exponents = galois.factors(n)
    choices = [
        [[int(p) ** part for part in partition] for partition in _partitions(int(e))]
        for p, e in zip(primes, exponents)
    ]
    groups = {make_group(0, [q for block in combo for q in block]) for combo in itertools.product(*choices)}
    return sorted(groups)


def groups_of_order_at_most(max_order: int, min_order: int = 2) -> list:
    """All finite abelian groups with min_order <= order <= max_order"""
    groups = []
    for n in range(min_order, max_order + 1):
        groups.extend(groups_of_order(n))
    return groups


def box_elements(group: GroupSpec, radius: int) -> tuple:
    """Elements whose free coordinates lie in [-radius, radius]"""
    free_ranges = [range(-radius, radius + 1)] * group.free_rank
    torsion_ranges = [range(n) for n in group.torsion_orders]
    return tuple(
        GroupElement(tuple(c[:group.free_rank]), tuple(c[group.free_rank:]))
        for c in itertools.product(*free_ranges, *torsion_ranges)
    )


def random_subset(group: GroupSpec, k: int, rng, exclude_zero: bool = False, radius: int = 3) -> GroupSubset:
    """
    Uniform k-subset of a finite group, or of the radius box of an infinite one.

    Args:
        rng: numpy Generator
        exclude_zero: draw from G minus {0} (for targets B)
    """
    pool = group_elements(group) if group.is_finite else box_elements(group, radius)
    if exclude_zero:
        pool = tuple(x for x in pool if not x.is_zero)
    if k > len(pool):
        raise PreconditionError(f"cannot draw {k} elements from {len(pool)}")
    picks = rng.choice(len(pool), size=k, replace=False)
    return GroupSubset(group, tuple(sorted(pool[int(i)] for i in picks)))
