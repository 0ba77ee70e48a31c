"""
Finite Field Extensions F_p ⊂ F_{p^n}
Field arithmetic on coefficient vectors, F_p-subspaces in canonical echelon form,
subfields and stabilizer subfields
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import galois
import numpy as np

from matchlab import linalg
from matchlab.config import BUDGETS
from matchlab.errors import (
    BudgetExceededError, GroupMismatchError, PreconditionError, TheoremViolation,
)

logger = logging.getLogger(__name__)


# =============================================================================
# FIELD CONTEXT
# =============================================================================

@dataclass(frozen=True)
class FieldCtx:
    """F_{p^n} = F_p[t]/(modulus); modulus little-endian, monic, irreducible"""

    p: int
    n: int
    modulus: tuple

    @cached_property
    def reduction_table(self) -> np.ndarray:
        """Row k is t^k mod modulus, for k < 2n - 1"""
        p, n = self.p, self.n
        table = np.zeros((max(2 * n - 1, 1), n), dtype=np.int64)
        current = np.zeros(n, dtype=np.int64)
        current[0] = 1
        tail = (-np.array(self.modulus[:n], dtype=np.int64)) % p
        for k in range(table.shape[0]):
            table[k] = current
            # multiply by t: shift up, fold the overflow through t^n = -(c0 + ... )
            top = current[n - 1]
            current = np.concatenate([[0], current[:n - 1]])
            current = (current + top * tail) % p
        return table

    @cached_property
    def frobenius(self) -> np.ndarray:
        """Row j is (t^j)^p, so x^p = x @ frobenius"""
        rows = []
        for j in range(self.n):
            basis = np.zeros(self.n, dtype=np.int64)
            basis[j] = 1
            rows.append(_pow_vec(self, basis, self.p))
        return np.array(rows, dtype=np.int64)

    @property
    def order(self) -> int:
        return self.p ** self.n

    @property
    def zero(self) -> "FqElement":
        return FqElement((0,) * self.n)

    @property
    def one(self) -> "FqElement":
        return FqElement((1,) + (0,) * (self.n - 1))

    def element(self, value) -> "FqElement":
        """Coerce a coefficient sequence (constant term first) into an element"""
        if isinstance(value, FqElement):
            coeffs = value.coeffs
        else:
            coeffs = tuple(int(c) for c in np.asarray(value).ravel())
        if len(coeffs) != self.n:
            raise GroupMismatchError(f"element {list(coeffs)} does not have {self.n} coefficients")
        return FqElement(tuple(c % self.p for c in coeffs))

    def __str__(self) -> str:
        return f"F_{self.p}^{self.n}"


@dataclass(frozen=True, order=True)
class FqElement:
    """Coefficients in the power basis 1, t, ..., t^(n-1)"""

    coeffs: tuple

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def vector(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    def __str__(self) -> str:
        return "[" + ",".join(str(c) for c in self.coeffs) + "]"


def _poly(ctx: FieldCtx, coeffs) -> galois.Poly:
    return galois.Poly(list(coeffs)[::-1], field=linalg.prime_field(ctx.p))


def _first_irreducible(p: int, n: int) -> tuple:
    """Scan monic degree-n polynomials by (c_{n-1}, ..., c_0) lexicographically"""
    GF = linalg.prime_field(p)
    for lower in itertools.product(range(p), repeat=n):
        descending = [1, *lower]
        if galois.Poly(descending, field=GF).is_irreducible():
            return tuple(descending[::-1])
    raise TheoremViolation(f"no irreducible polynomial of degree {n} over F_{p}")


def make_field(p: int, n: int, modulus=None) -> FieldCtx:
    """
    Build the extension F_p ⊂ F_{p^n}.

    Args:
        p: prime
        n: degree >= 1
        modulus: optional monic irreducible, little-endian [c0, ..., c_{n-1}, 1]

    Returns:
        FieldCtx; (2, 2) has modulus t^2 + t + 1, (2, 4) has t^4 + t + 1
    """
    return _make_field(int(p), int(n), None if modulus is None else tuple(int(c) for c in modulus))


@lru_cache(maxsize=None)
def _make_field(p: int, n: int, modulus) -> FieldCtx:
    if not galois.is_prime(p):
        raise PreconditionError(f"p = {p} is not prime")
    if n < 1:
        raise PreconditionError(f"extension degree must be >= 1, got {n}")

    if modulus is None:
        modulus = _first_irreducible(p, n)
    else:
        modulus = tuple(int(c) % p for c in modulus)
        if len(modulus) != n + 1 or modulus[-1] != 1:
            raise PreconditionError(f"modulus must be monic of degree {n}, got {list(modulus)}")
        if not galois.Poly(list(modulus)[::-1], field=linalg.prime_field(p)).is_irreducible():
            raise PreconditionError(f"modulus {list(modulus)} is reducible over F_{p}")

    ctx = FieldCtx(p, n, modulus)
    logger.debug("Field %s with modulus %s", ctx, list(modulus))
    return ctx


# =============================================================================
# ARITHMETIC
# =============================================================================

def _mul_vec(ctx: FieldCtx, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    product = np.convolve(x, y) % ctx.p
    return product @ ctx.reduction_table[:len(product)] % ctx.p


def _pow_vec(ctx: FieldCtx, x: np.ndarray, e: int) -> np.ndarray:
    result = np.zeros(ctx.n, dtype=np.int64)
    result[0] = 1
    base = np.asarray(x, dtype=np.int64) % ctx.p
    while e:
        if e & 1:
            result = _mul_vec(ctx, result, base)
        base = _mul_vec(ctx, base, base)
        e >>= 1
    return result


def _inv_vec(ctx: FieldCtx, x: np.ndarray) -> np.ndarray:
    if not np.any(x % ctx.p):
        raise PreconditionError("zero has no inverse")
    _, s, _ = galois.egcd(_poly(ctx, x), _poly(ctx, ctx.modulus))
    coeffs = np.array(s.coeffs, dtype=np.int64)[::-1]
    result = np.zeros(ctx.n, dtype=np.int64)
    result[:len(coeffs)] = coeffs
    return result % ctx.p


def fq_arith(ctx: FieldCtx, kind: str, x, y=None) -> FqElement:
    """
    Field arithmetic: kind "mul" (x*y), "inv" (x^-1) or "pow" (x^y, y an integer).
    Also "add" and "sub" for convenience.
    """
    a = ctx.element(x).vector()
    if kind == "inv":
        return FqElement(tuple(int(c) for c in _inv_vec(ctx, a)))
    if kind == "pow":
        e = int(y)
        if e < 0:
            a, e = _inv_vec(ctx, a), -e
        return FqElement(tuple(int(c) for c in _pow_vec(ctx, a, e)))
    if y is None:
        raise PreconditionError(f"'{kind}' needs two operands")
    b = ctx.element(y).vector()
    if kind == "mul":
        result = _mul_vec(ctx, a, b)
    elif kind == "add":
        result = (a + b) % ctx.p
    elif kind == "sub":
        result = (a - b) % ctx.p
    else:
        raise PreconditionError(f"Unknown field operation '{kind}'")
    return FqElement(tuple(int(c) for c in result))


@lru_cache(maxsize=4096)
def _multiplication_matrix(ctx: FieldCtx, coeffs: tuple) -> np.ndarray:
    a = np.array(coeffs, dtype=np.int64)
    rows = np.zeros((ctx.n, ctx.n), dtype=np.int64)
    power = np.zeros(ctx.n, dtype=np.int64)
    power[0] = 1
    t = np.zeros(ctx.n, dtype=np.int64)
    if ctx.n > 1:
        t[1] = 1
    else:
        t[0] = (-ctx.modulus[0]) % ctx.p
    for j in range(ctx.n):
        rows[j] = _mul_vec(ctx, a, power)
        power = _mul_vec(ctx, power, t)
    rows.setflags(write=False)
    return rows


def multiplication_matrix(ctx: FieldCtx, a) -> np.ndarray:
    """M_a with row j = a * t^j; x * a = x @ M_a"""
    return _multiplication_matrix(ctx, ctx.element(a).coeffs)


# =============================================================================
# SUBSPACES
# =============================================================================

@dataclass(frozen=True)
class Subspace:
    """F_p-subspace of F_{p^n}; rows in reduced row-echelon form, no zero rows"""

    ctx: FieldCtx
    rows: tuple

    @property
    def dim(self) -> int:
        return len(self.rows)

    @cached_property
    def matrix(self) -> np.ndarray:
        return linalg.as_matrix(self.rows, self.ctx.n)

    @property
    def basis(self) -> tuple:
        return tuple(FqElement(row) for row in self.rows)

    @property
    def pivots(self) -> tuple:
        return linalg.pivot_columns(self.matrix)

    @property
    def is_zero(self) -> bool:
        return not self.rows

    def __contains__(self, x) -> bool:
        return linalg.in_span(self.matrix, self.ctx.element(x).vector(), self.ctx.p)

    def issubspace(self, other: "Subspace") -> bool:
        return all(FqElement(row) in other for row in self.rows)

    def __str__(self) -> str:
        return "<" + ", ".join(str(FqElement(r)) for r in self.rows) + ">"


@dataclass(frozen=True)
class SubfieldDesc:
    """F_{p^d} inside F_{p^n}"""

    d: int
    space: Subspace

    def is_closed(self) -> bool:
        """Contains 1 and is closed under multiplication"""
        ctx = self.space.ctx
        if ctx.one not in self.space:
            return False
        return all(
            fq_arith(ctx, "mul", x, y) in self.space
            for x, y in itertools.combinations_with_replacement(self.space.basis, 2)
        )


def _from_matrix(ctx: FieldCtx, matrix) -> Subspace:
    reduced = linalg.rref(matrix, ctx.p, ctx.n)
    return Subspace(ctx, tuple(tuple(int(c) for c in row) for row in reduced))


def subspace_from_vectors(ctx: FieldCtx, vectors) -> Subspace:
    """Canonical echelon form of the span; [] is the zero space"""
    rows = [ctx.element(v).vector() for v in vectors]
    return _from_matrix(ctx, rows)


def zero_space(ctx: FieldCtx) -> Subspace:
    return Subspace(ctx, ())


def full_space(ctx: FieldCtx) -> Subspace:
    return _from_matrix(ctx, np.eye(ctx.n, dtype=np.int64))


def _same_ctx(*spaces) -> FieldCtx:
    ctx = spaces[0].ctx
    for W in spaces[1:]:
        if W.ctx != ctx:
            raise GroupMismatchError(f"subspaces of {ctx} and {W.ctx}")
    return ctx


def meet_join(U: Subspace, V: Subspace) -> tuple:
    """(U ∩ V, U + V), with the dimension identity checked"""
    ctx = _same_ctx(U, V)
    join = _from_matrix(ctx, np.vstack([U.matrix, V.matrix]))
    meet_rows = linalg.intersect_rows(U.matrix, V.matrix, ctx.p, ctx.n)
    meet = Subspace(ctx, tuple(tuple(int(c) for c in row) for row in meet_rows))
    if U.dim + V.dim != meet.dim + join.dim:
        raise TheoremViolation(
            f"dim U + dim V = {U.dim + V.dim} but dim meet + dim join = {meet.dim + join.dim}"
        )
    return meet, join


def intersection(U: Subspace, V: Subspace) -> Subspace:
    return meet_join(U, V)[0]


def scale_space(a, W: Subspace, inverse: bool = False) -> Subspace:
    """a * W, or a^-1 * W"""
    ctx = W.ctx
    a = ctx.element(a)
    if a.is_zero:
        raise PreconditionError("cannot scale by zero")
    if inverse:
        a = fq_arith(ctx, "inv", a)
    if W.is_zero:
        return W
    scaled = _from_matrix(ctx, W.matrix @ multiplication_matrix(ctx, a) % ctx.p)
    if scaled.dim != W.dim:
        raise TheoremViolation(f"scaling by {a} changed dimension {W.dim} -> {scaled.dim}")
    return scaled


def product_span(A: Subspace, B: Subspace) -> Subspace:
    """⟨AB⟩ spanned by products of basis rows"""
    ctx = _same_ctx(A, B)
    products = [_mul_vec(ctx, a, b) for a in A.matrix for b in B.matrix]
    return _from_matrix(ctx, products)


def annihilator(W: Subspace) -> np.ndarray:
    """Rows y with w . y = 0 for every w in W"""
    return linalg.null_space(W.matrix, W.ctx.p, W.ctx.n)


# =============================================================================
# SUBFIELDS
# =============================================================================

@lru_cache(maxsize=None)
def subfield_lattice(ctx: FieldCtx) -> tuple:
    """One F_{p^d} per divisor d of n, as the fixed space of x -> x^(p^d)"""
    lattice = []
    for d in galois.divisors(ctx.n):
        d = int(d)
        shifted = (linalg.matrix_power(ctx.frobenius, d, ctx.p) - np.eye(ctx.n, dtype=np.int64)) % ctx.p
        fixed = linalg.left_kernel(shifted, ctx.p, ctx.n)
        space = _from_matrix(ctx, fixed)
        if space.dim != d:
            raise TheoremViolation(f"fixed field of Frobenius^{d} in {ctx} has dimension {space.dim}")
        lattice.append(SubfieldDesc(d, space))
    return tuple(lattice)


def subfield(ctx: FieldCtx, d: int) -> SubfieldDesc:
    for desc in subfield_lattice(ctx):
        if desc.d == d:
            return desc
    raise PreconditionError(f"{d} does not divide {ctx.n}")


def proper_subfields(ctx: FieldCtx) -> tuple:
    return tuple(desc for desc in subfield_lattice(ctx) if desc.d < ctx.n)


def multiplier_space(W: Subspace, target: Subspace = None) -> Subspace:
    """{x in L : x W ⊆ target}, target defaulting to W"""
    ctx = W.ctx
    target = W if target is None else target
    ann = annihilator(target)
    if ann.shape[0] == 0 or W.is_zero:
        return full_space(ctx)
    constraints = np.hstack([multiplication_matrix(ctx, w) @ ann.T % ctx.p for w in W.rows])
    return _from_matrix(ctx, linalg.left_kernel(constraints, ctx.p, ctx.n))


def stabilizer_subfield(W: Subspace) -> SubfieldDesc:
    """{x : x W ⊆ W}, identified with a member of the subfield lattice"""
    if W.is_zero:
        raise PreconditionError("stabilizer of the zero space")
    stab = multiplier_space(W)
    for desc in subfield_lattice(W.ctx):
        if desc.space == stab:
            return desc
    raise TheoremViolation(f"stabilizer of {W} is not a subfield", context={"W": W})


@dataclass(frozen=True)
class LinearKneserCertificate:
    A: Subspace
    B: Subspace
    AB: Subspace
    H: SubfieldDesc
    slack: int


def linear_kneser_verify(A: Subspace, B: Subspace) -> LinearKneserCertificate:
    """dim⟨AB⟩ >= dim A + dim B - dim H, H the stabilizer subfield of ⟨AB⟩"""
    _same_ctx(A, B)
    if A.is_zero or B.is_zero:
        raise PreconditionError("linear Kneser needs nonzero subspaces")
    AB = product_span(A, B)
    H = stabilizer_subfield(AB)
    slack = AB.dim - A.dim - B.dim + H.d
    if slack < 0:
        raise TheoremViolation(
            f"linear Kneser fails: dim AB={AB.dim} dim A={A.dim} dim B={B.dim} dim H={H.d}",
            context={"A": A, "B": B},
        )
    return LinearKneserCertificate(A, B, AB, H, slack)


# =============================================================================
# ENUMERATION AND SAMPLING
# =============================================================================

def gaussian_binomial(k: int, m: int, p: int) -> int:
    """Number of m-dimensional subspaces of F_p^k"""
    if m < 0 or m > k:
        return 0
    num, den = 1, 1
    for i in range(m):
        num *= p ** (k - i) - 1
        den *= p ** (i + 1) - 1
    return num // den


def _echelon_matrices(k: int, m: int, p: int):
    """All m x k reduced echelon matrices of rank m, by pivots then free entries"""
    for pivots in itertools.combinations(range(k), m):
        free = [(i, j) for i in range(m) for j in range(pivots[i] + 1, k) if j not in pivots]
        for values in itertools.product(range(p), repeat=len(free)):
            matrix = np.zeros((m, k), dtype=np.int64)
            for i, col in enumerate(pivots):
                matrix[i, col] = 1
            for (i, j), v in zip(free, values):
                matrix[i, j] = v
            yield matrix


def enumerate_subspaces(W: Subspace, m: int, budget: int = None):
    """
    Every m-dimensional subspace of W, each exactly once.

    Raises:
        BudgetExceededError: more subspaces than the budget allows
    """
    budget = BUDGETS["subspace_budget"] if budget is None else budget
    count = gaussian_binomial(W.dim, m, W.ctx.p)
    if count > budget:
        raise BudgetExceededError(f"{count} subspaces of dimension {m} exceed the budget {budget}")
    if m == 0:
        yield zero_space(W.ctx)
        return
    for coords in _echelon_matrices(W.dim, m, W.ctx.p):
        yield _from_matrix(W.ctx, coords @ W.matrix % W.ctx.p)


def subspace_elements(W: Subspace) -> list:
    """All elements of W sorted by coefficients"""
    ctx = W.ctx
    if W.is_zero:
        return [ctx.zero]
    vectors = {
        tuple(int(c) for c in np.array(combo, dtype=np.int64) @ W.matrix % ctx.p)
        for combo in itertools.product(range(ctx.p), repeat=W.dim)
    }
    return [FqElement(v) for v in sorted(vectors)]


def ordered_basis_count(W: Subspace) -> int:
    p, k = W.ctx.p, W.dim
    count = 1
    for i in range(k):
        count *= p ** k - p ** i
    return count


def ordered_bases(W: Subspace, budget: int = None):
    """Every ordered basis of W in canonical order (depth-first over elements)"""
    budget = BUDGETS["ordered_basis_budget"] if budget is None else budget
    count = ordered_basis_count(W)
    if count > budget:
        raise BudgetExceededError(f"{count} ordered bases exceed the budget {budget}")
    ctx = W.ctx
    elements = [x for x in subspace_elements(W) if not x.is_zero]

    def extend(prefix, span_rows):
        if len(prefix) == W.dim:
            yield tuple(prefix)
            return
        for x in elements:
            if linalg.in_span(span_rows, x.vector(), ctx.p):
                continue
            yield from extend(prefix + [x], np.vstack([span_rows, x.vector()]))

    yield from extend([], np.zeros((0, ctx.n), dtype=np.int64))


def random_subspace(ctx: FieldCtx, dim: int, rng, within: Subspace = None, max_attempts: int = 1000) -> Subspace:
    """Span of a uniform random dim x k matrix, redrawn until the rank is dim"""
    ambient = full_space(ctx) if within is None else within
    if dim > ambient.dim or dim < 0:
        raise PreconditionError(f"no {dim}-dimensional subspace inside a {ambient.dim}-dimensional space")
    for _ in range(max_attempts):
        coords = rng.integers(0, ctx.p, size=(dim, ambient.dim))
        space = _from_matrix(ctx, coords @ ambient.matrix % ctx.p)
        if space.dim == dim:
            return space
    raise PreconditionError(f"no rank-{dim} draw in {max_attempts} attempts")


def random_basis(W: Subspace, rng, max_attempts: int = 1000) -> tuple:
    """Uniform random ordered basis: an invertible change of basis applied to the rows"""
    ctx = W.ctx
    for _ in range(max_attempts):
        change = rng.integers(0, ctx.p, size=(W.dim, W.dim))
        if linalg.rank(change, ctx.p, W.dim) == W.dim:
            vectors = change @ W.matrix % ctx.p
            return tuple(FqElement(tuple(int(c) for c in row)) for row in vectors)
    raise PreconditionError(f"no invertible draw in {max_attempts} attempts")
