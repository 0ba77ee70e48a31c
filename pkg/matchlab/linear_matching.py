"""
Matchings between Subspaces of F_{p^n}
Dimension criterion for bases, matched-basis construction, matched and locally
matched subspaces, strong matchings and primitive subspaces
"""
import itertools
import logging
from dataclasses import dataclass

import galois
import numpy as np

from matchlab import linalg
from matchlab.config import BUDGETS
from matchlab.errors import (
    BudgetExceededError, GroupMismatchError, PreconditionError, TheoremViolation,
)
from matchlab.ffext import (
    FieldCtx, FqElement, Subspace, enumerate_subspaces, fq_arith, gaussian_binomial,
    intersection, ordered_basis_count, ordered_bases, product_span, proper_subfields,
    random_basis, random_subspace, scale_space, subfield, subfield_lattice,
    subspace_from_vectors,
)

logger = logging.getLogger(__name__)


# =============================================================================
# DOMAIN TYPES
# =============================================================================

@dataclass(frozen=True)
class BasisSeq:
    """Ordered linearly independent vectors; position i pairs a_i with b_i"""

    ctx: FieldCtx
    vectors: tuple

    def __post_init__(self):
        if linalg.rank(self.matrix, self.ctx.p, self.ctx.n) != len(self.vectors):
            raise PreconditionError("basis vectors are linearly dependent")

    @property
    def matrix(self) -> np.ndarray:
        return linalg.as_matrix([v.coeffs for v in self.vectors], self.ctx.n)

    def span(self) -> Subspace:
        return subspace_from_vectors(self.ctx, self.vectors)

    def __len__(self) -> int:
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def __getitem__(self, i):
        return self.vectors[i]


def make_basis(ctx: FieldCtx, vectors) -> BasisSeq:
    return BasisSeq(ctx, tuple(ctx.element(v) for v in vectors))


@dataclass(frozen=True)
class BasisMatching:
    a_basis: BasisSeq
    b_basis: BasisSeq
    A: Subspace
    method: str = "dual-transversal"


@dataclass(frozen=True)
class CriterionViolator:
    """J is 1-based; witness_space = ∩_{i in J} (a_i^-1 A ∩ B), deficit = dim - (n - #J) > 0"""

    a_basis: BasisSeq
    J: tuple
    witness_space: Subspace
    deficit: int


@dataclass(frozen=True)
class MatchedReport:
    ok: bool
    mode: str
    examined: int
    seed: int = None
    failing_basis: BasisSeq = None
    violator: CriterionViolator = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class PrimitiveReport:
    ok: bool
    offender: object = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SubfieldTrace:
    """A qualifying subfield H, its module {a in A : aH ⊆ A}, H ∩ B and the Ã found"""

    H: object
    module: Subspace
    intersection: Subspace
    a_tilde: Subspace = None
    mode: str = "exhaustive"
    candidates: int = 0

    @property
    def ok(self) -> bool:
        return self.a_tilde is not None


@dataclass(frozen=True)
class LinearLocalReport:
    A: Subspace
    B: Subspace
    traces: tuple

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.traces)

    @property
    def first_failure(self):
        return next((t for t in self.traces if not t.ok), None)

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class LocalImpliesMatchedReport:
    local: LinearLocalReport
    matched: MatchedReport

    @property
    def implication_holds(self) -> bool:
        return not self.local.ok or self.matched.ok


@dataclass(frozen=True)
class StrongReport:
    strong: bool
    matched: MatchedReport = None
    local: LinearLocalReport = None

    @property
    def finding(self) -> bool:
        """Strong matching without local matchedness"""
        return self.strong and self.local is not None and not self.local.ok


# =============================================================================
# SHARED PIECES
# =============================================================================

def _check_spaces(A: Subspace, B: Subspace) -> FieldCtx:
    if A.ctx != B.ctx:
        raise GroupMismatchError(f"A lives in {A.ctx}, B in {B.ctx}")
    return A.ctx


def _as_basis(ctx: FieldCtx, basis) -> BasisSeq:
    if isinstance(basis, BasisSeq):
        if basis.ctx != ctx:
            raise GroupMismatchError(f"basis lives in {basis.ctx}, not {ctx}")
        return basis
    return make_basis(ctx, basis)


def target_slices(a_basis: BasisSeq, B: Subspace, A: Subspace) -> list:
    """V_i = a_i^-1 A ∩ B"""
    return [intersection(scale_space(a, A, inverse=True), B) for a in a_basis]


def _check_basis_pair(a_basis, B: Subspace, A: Subspace, require_spanning: bool, max_dim: int):
    ctx = _check_spaces(A, B)
    a_basis = _as_basis(ctx, a_basis)
    n = len(a_basis)
    if n == 0:
        raise PreconditionError("empty basis")
    if n > max_dim:
        raise BudgetExceededError(f"criterion limited to dimension {max_dim}, got {n}")
    if n != B.dim:
        raise PreconditionError(f"basis has {n} vectors but dim B = {B.dim}")
    span = a_basis.span()
    if require_spanning and span != A:
        raise PreconditionError("basis does not span A")
    if not span.issubspace(A):
        raise PreconditionError("basis is not inside A")
    return ctx, a_basis


def _span_set(vectors, p: int) -> set:
    span = {tuple([0] * (len(vectors[0]) if vectors else 0))}
    for v in vectors:
        span = _extend_span(span, v, p)
    return span


def _extend_span(span: set, v, p: int) -> set:
    return {tuple((s + c * x) % p for s, x in zip(point, v)) for point in span for c in range(p)}


def _coordinate_sets(slices, B: Subspace) -> list:
    """Element sets of each V_i, in coordinates relative to the rows of B"""
    p = B.ctx.p
    sets = []
    for V in slices:
        coords = [tuple(int(c) for c in linalg.coordinates(B.matrix, row, p)) for row in V.rows]
        if coords:
            sets.append(_span_set(coords, p))
        else:
            sets.append({(0,) * B.dim})
    return sets


# =============================================================================
# CRITERION
# =============================================================================

def basis_matchable(a_basis, B: Subspace, A: Subspace, require_spanning: bool = True,
                    max_dim: int = None):
    """
    Dimension criterion for the basis a_1..a_n of A against B.

    Checks dim ∩_{i in J} (a_i^-1 A ∩ B) <= n - #J for every nonempty J, by size then
    lexicographically; intersections of size s reuse those of size s - 1.

    Returns:
        None when the criterion holds, else the first CriterionViolator
    """
    max_dim = BUDGETS["max_criterion_dim"] if max_dim is None else max_dim
    _, a_basis = _check_basis_pair(a_basis, B, A, require_spanning, max_dim)
    n = len(a_basis)
    slices = target_slices(a_basis, B, A)

    previous = {(): B}
    for size in range(1, n + 1):
        current = {}
        for J in itertools.combinations(range(n), size):
            head = previous.get(J[:-1])
            if head is None:
                continue
            W = intersection(head, slices[J[-1]]) if size > 1 else slices[J[0]]
            if W.dim > n - size:
                return CriterionViolator(a_basis, tuple(j + 1 for j in J), W, W.dim - (n - size))
            # zero intersections cannot violate for any superset
            if not W.is_zero:
                current[J] = W
        previous = current
    return None


def criterion_witness(a_basis: BasisSeq, B: Subspace, A: Subspace, J) -> Subspace:
    """Recompute ∩_{i in J} (a_i^-1 A ∩ B) for a 1-based J"""
    slices = target_slices(a_basis, B, A)
    W = B
    for j in J:
        W = intersection(W, slices[j - 1])
    return W


# =============================================================================
# MATCHED BASES
# =============================================================================

def matched_basis_failure(a_basis: BasisSeq, b_basis: BasisSeq, A: Subspace):
    """
    First failure of the matched-basis condition, or None.

    For every i: a_i b_i not in A, and a_i b in A forces b into the span of the
    other b_j.
    """
    ctx = A.ctx
    if len(a_basis) != len(b_basis):
        return "bases have different lengths"
    B = b_basis.span()
    for i, (a, b) in enumerate(zip(a_basis, b_basis), start=1):
        if fq_arith(ctx, "mul", a, b) in A:
            return f"a_{i}*b_{i} ∈ A"
    slices = target_slices(a_basis, B, A)
    for i, V in enumerate(slices):
        others = subspace_from_vectors(ctx, [b for j, b in enumerate(b_basis) if j != i])
        if not V.issubspace(others):
            return f"a_{i + 1}*b ∈ A for some b outside the hyperplane of b_{i + 1}"
    return None


def _dual_transversal(annihilators, m: int, p: int):
    """Independent phi_i in Ann(V_i), depth-first in canonical order"""
    candidates = []
    for ann in annihilators:
        vectors = {
            tuple(int(c) for c in np.array(combo, dtype=np.int64) @ ann % p)
            for combo in itertools.product(range(p), repeat=ann.shape[0])
        }
        vectors.discard((0,) * m)
        candidates.append(sorted(vectors))

    chosen = []

    def extend(i, span):
        if i == m:
            return True
        for phi in candidates[i]:
            if phi in span:
                continue
            chosen.append(phi)
            if extend(i + 1, _extend_span(span, phi, p)):
                return True
            chosen.pop()
        return False

    if extend(0, {(0,) * m}):
        return np.array(chosen, dtype=np.int64)
    return None


def find_matched_basis(a_basis, B: Subspace, A: Subspace, require_spanning: bool = True,
                       canonical: bool = False, budget: int = None):
    """
    Matched basis of B for the basis a_1..a_n of A.

    When the criterion holds, picks independent functionals phi_i vanishing on
    a_i^-1 A ∩ B (in B-coordinates) and returns their dual basis, re-verified.
    That basis is a valid witness but not necessarily the first one in canonical
    candidate order; canonical=True returns the first one instead, found by
    search_matched_basis (exhaustive over ordered bases of B, budgeted).

    Returns:
        BasisMatching | CriterionViolator
    """
    violator = basis_matchable(a_basis, B, A, require_spanning=require_spanning)
    if violator is not None:
        return violator

    if canonical:
        found = search_matched_basis(a_basis, B, A, require_spanning=require_spanning, budget=budget)
        if found is None:
            raise TheoremViolation(
                "criterion holds but the exhaustive search finds no matched basis",
                context={"a_basis": a_basis, "A": A, "B": B},
            )
        return found

    ctx = A.ctx
    a_basis = _as_basis(ctx, a_basis)
    m, p = B.dim, ctx.p
    slices = target_slices(a_basis, B, A)
    annihilators = []
    for V in slices:
        coords = [linalg.coordinates(B.matrix, row, p) for row in V.rows]
        annihilators.append(linalg.null_space(linalg.as_matrix(coords, m), p, m))

    phis = _dual_transversal(annihilators, m, p)
    if phis is None:
        raise TheoremViolation(
            "criterion holds but no matched basis exists",
            context={"a_basis": a_basis, "A": A, "B": B},
        )

    dual = linalg.inverse(phis.T, p)
    vectors = dual @ B.matrix % p
    b_basis = make_basis(ctx, vectors)
    failure = matched_basis_failure(a_basis, b_basis, A)
    if failure:
        raise TheoremViolation(f"constructed basis is not matched: {failure}",
                               context={"a_basis": a_basis, "A": A, "B": B})
    return BasisMatching(a_basis, b_basis, A)


def _coordinate_search(slice_sets, m: int, p: int, hyperplane: bool):
    """
    Bases of F_p^m with b_i outside V_i, canonical depth-first order.

    With hyperplane=True a complete basis is accepted only when every V_i lies in
    the span of the b_j, j != i.
    """
    nonzero = [v for v in itertools.product(range(p), repeat=m) if any(v)]

    def accept(chosen):
        if not hyperplane:
            return True
        for i, V in enumerate(slice_sets):
            others = _span_set([b for j, b in enumerate(chosen) if j != i], p) if m > 1 else {(0,)}
            if not V <= others:
                return False
        return True

    def extend(chosen, span):
        i = len(chosen)
        if i == m:
            return list(chosen) if accept(chosen) else None
        for b in nonzero:
            if b in span or b in slice_sets[i]:
                continue
            found = extend(chosen + [b], _extend_span(span, b, p))
            if found is not None:
                return found
        return None

    return extend([], {(0,) * m})


def search_matched_basis(a_basis, B: Subspace, A: Subspace, require_spanning: bool = True,
                         budget: int = None):
    """
    Exhaustive oracle: backtrack over b_i in B \\ (a_i^-1 A ∩ B) keeping independence,
    accept only bases satisfying the full hyperplane condition.

    Returns:
        BasisMatching or None
    """
    budget = BUDGETS["ordered_basis_budget"] if budget is None else budget
    ctx, a_basis = _check_basis_pair(a_basis, B, A, require_spanning, BUDGETS["max_criterion_dim"])
    if ordered_basis_count(B) > budget:
        raise BudgetExceededError(f"{ordered_basis_count(B)} ordered bases of B exceed {budget}")
    slice_sets = _coordinate_sets(target_slices(a_basis, B, A), B)
    found = _coordinate_search(slice_sets, B.dim, ctx.p, hyperplane=True)
    if found is None:
        return None
    vectors = np.array(found, dtype=np.int64) @ B.matrix % ctx.p
    return BasisMatching(a_basis, make_basis(ctx, vectors), A, method="exhaustive")


# =============================================================================
# MATCHED SUBSPACES
# =============================================================================

def _bases_of(W: Subspace, mode: str, trials: int, seed: int, budget: int):
    if mode == "exhaustive":
        count = ordered_basis_count(W)
        if count > budget:
            raise BudgetExceededError(f"{count} ordered bases exceed the budget {budget}; use sample mode")
        yield from ordered_bases(W, budget)
    elif mode == "sample":
        rng = np.random.default_rng(seed)
        for _ in range(trials):
            yield random_basis(W, rng)
    else:
        raise PreconditionError(f"Unknown mode '{mode}'")


def is_matched(A: Subspace, B: Subspace, mode: str = "exhaustive", trials: int = 200,
               seed: int = 0, budget: int = None) -> MatchedReport:
    """
    Every (exhaustive) or every sampled basis of A can be matched to a basis of B.

    Bases with the same set of slices a_i^-1 A ∩ B share one criterion evaluation.
    """
    ctx = _check_spaces(A, B)
    if A.dim != B.dim:
        raise PreconditionError(f"dim A = {A.dim} but dim B = {B.dim}")
    if A.dim == 0:
        raise PreconditionError("A and B must be nonzero")
    budget = BUDGETS["ordered_basis_budget"] if budget is None else budget

    seen = {}
    examined = 0
    for vectors in _bases_of(A, mode, trials, seed, budget):
        examined += 1
        basis = BasisSeq(ctx, tuple(vectors))
        key = tuple(sorted(V.rows for V in target_slices(basis, B, A)))
        if key not in seen:
            seen[key] = basis_matchable(basis, B, A) is None
        if not seen[key]:
            violator = basis_matchable(basis, B, A)
            return MatchedReport(False, mode, examined, seed if mode == "sample" else None, basis, violator)
    return MatchedReport(True, mode, examined, seed if mode == "sample" else None)


def strong_matching_exists(A: Subspace, B: Subspace) -> bool:
    """⟨AB⟩ ∩ A = {0}"""
    _check_spaces(A, B)
    if A.is_zero or B.is_zero:
        raise PreconditionError("strong matching needs nonzero subspaces")
    return intersection(product_span(A, B), A).is_zero


def primitive_check(B: Subspace) -> PrimitiveReport:
    """B meets no proper subfield F_{p^d}, d | n, d < n"""
    if B.is_zero:
        raise PreconditionError("primitive check of the zero space")
    for desc in proper_subfields(B.ctx):
        if not intersection(B, desc.space).is_zero:
            return PrimitiveReport(False, desc)
    return PrimitiveReport(True)


def a_matched(a_tilde_basis, B_tilde: Subspace, A: Subspace, rule: str = "definition",
              mode: str = "basis", trials: int = 200, seed: int = 0, budget: int = None) -> bool:
    """
    Ã = span(a_tilde_basis) is A-matched to B̃.

    rule="definition": some basis of B̃ has a_i b_i not in A.
    rule="criterion": the dimension criterion with B̃ in place of B.
    mode="basis" tests the given basis only; "all_bases"/"sample" quantify over
    every or sampled bases of Ã.
    """
    ctx = _check_spaces(A, B_tilde)
    basis = _as_basis(ctx, a_tilde_basis)
    if len(basis) != B_tilde.dim or not len(basis):
        raise PreconditionError(f"dim Ã = {len(basis)} but dim B̃ = {B_tilde.dim}")
    if not basis.span().issubspace(A):
        raise PreconditionError("Ã is not inside A")
    budget = BUDGETS["ordered_basis_budget"] if budget is None else budget

    if mode == "basis":
        return _a_matched_basis(basis, B_tilde, A, rule)

    a_tilde = basis.span()
    per_mode = "exhaustive" if mode == "all_bases" else mode
    return _a_matched_space(a_tilde, B_tilde, A, rule, per_mode, trials, seed, budget)


def _a_matched_basis(basis: BasisSeq, B_tilde: Subspace, A: Subspace, rule: str) -> bool:
    if rule == "criterion":
        return basis_matchable(basis, B_tilde, A, require_spanning=False) is None
    if rule == "definition":
        slice_sets = _coordinate_sets(target_slices(basis, B_tilde, A), B_tilde)
        return _coordinate_search(slice_sets, B_tilde.dim, A.ctx.p, hyperplane=False) is not None
    raise PreconditionError(f"Unknown rule '{rule}'")


def _a_matched_space(a_tilde: Subspace, B_tilde: Subspace, A: Subspace, rule: str, mode: str,
                     trials: int, seed: int, budget: int) -> bool:
    ctx = A.ctx
    seen = {}
    for vectors in _bases_of(a_tilde, mode, trials, seed, budget):
        basis = BasisSeq(ctx, tuple(vectors))
        key = tuple(sorted(V.rows for V in target_slices(basis, B_tilde, A)))
        if key not in seen:
            seen[key] = _a_matched_basis(basis, B_tilde, A, rule)
        if not seen[key]:
            return False
    return True


# =============================================================================
# LOCAL MATCHINGS
# =============================================================================

def h_module(A: Subspace, H: Subspace) -> Subspace:
    """{a in A : aH ⊆ A}"""
    module = A
    for h in H.basis:
        module = intersection(module, scale_space(h, A, inverse=True))
    return module


def linear_locally_matched(A: Subspace, B: Subspace, rule: str = "definition",
                           subspace_budget: int = None, subspace_trials: int = 200,
                           basis_budget: int = None, basis_trials: int = 200,
                           seed: int = 0) -> LinearLocalReport:
    """
    For every intermediate subfield H with H ∩ B != 0 and a nonzero a with aH ⊆ A,
    look for Ã ⊆ A of dimension dim(H ∩ B) that is A-matched to H ∩ B.

    Ã candidates are all subspaces in echelon order when their count fits the
    subspace budget, else seeded random draws.
    """
    ctx = _check_spaces(A, B)
    if A.dim != B.dim or A.dim == 0:
        raise PreconditionError(f"dim A = {A.dim}, dim B = {B.dim}; need equal and nonzero")
    if ctx.one in B:
        raise PreconditionError("1 must not belong to B")
    subspace_budget = BUDGETS["subspace_budget"] if subspace_budget is None else subspace_budget
    basis_budget = BUDGETS["ordered_basis_budget"] if basis_budget is None else basis_budget

    traces = []
    for desc in subfield_lattice(ctx):
        target = intersection(desc.space, B)
        if target.is_zero:
            continue
        module = h_module(A, desc.space)
        if module.is_zero:
            continue
        if desc.d == ctx.n:
            raise TheoremViolation(f"the whole field {ctx} qualifies as a local subfield",
                                   context={"A": A, "B": B})

        m = target.dim
        count = gaussian_binomial(A.dim, m, ctx.p)
        if count <= subspace_budget:
            mode, candidates = "exhaustive", enumerate_subspaces(A, m, subspace_budget)
        else:
            mode, candidates = "sample", _sampled_subspaces(A, m, subspace_trials, seed)

        basis_mode = "exhaustive" if ordered_basis_count(target) <= basis_budget else "sample"
        found, examined = None, 0
        for a_tilde in candidates:
            examined += 1
            if _a_matched_space(a_tilde, target, A, rule, basis_mode, basis_trials, seed, basis_budget):
                found = a_tilde
                break
        traces.append(SubfieldTrace(desc, module, target, found, mode, examined))
        logger.debug("H=F_%s^%s qualifies, Ã %s after %s candidates",
                     ctx.p, desc.d, "found" if found else "missing", examined)
    return LinearLocalReport(A, B, tuple(traces))


def _sampled_subspaces(A: Subspace, m: int, trials: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        yield random_subspace(A.ctx, m, rng, within=A)


def local_implies_matched_check(A: Subspace, B: Subspace, mode: str = "sample", trials: int = 200,
                                seed: int = 0, **local_options) -> LocalImpliesMatchedReport:
    """Locally matched implies matched; raises TheoremViolation on a counterexample"""
    local = linear_locally_matched(A, B, seed=seed, **local_options)
    matched = is_matched(A, B, mode=mode, trials=trials, seed=seed)
    report = LocalImpliesMatchedReport(local, matched)
    if not report.implication_holds:
        raise TheoremViolation("locally matched but not matched",
                               context={"A": A, "B": B, "basis": matched.failing_basis})
    return report


def strong_matching_check(A: Subspace, B: Subspace, mode: str = "sample", trials: int = 200,
                          seed: int = 0, **local_options) -> StrongReport:
    """
    For strong-matching pairs: matched is asserted, local matchedness is recorded.
    """
    if not strong_matching_exists(A, B):
        return StrongReport(False)
    matched = is_matched(A, B, mode=mode, trials=trials, seed=seed)
    if not matched:
        raise TheoremViolation("strong matching exists but a basis is unmatched",
                               context={"A": A, "B": B, "basis": matched.failing_basis})
    local = None
    if B.ctx.one not in B:
        local = linear_locally_matched(A, B, seed=seed, **local_options)
    return StrongReport(True, matched, local)


# =============================================================================
# LINEAR MATCHING PROPERTY
# =============================================================================

def decide_linear_matching_property(ctx: FieldCtx) -> bool:
    """No intermediate subfield: n is 1 or prime"""
    return ctx.n == 1 or galois.is_prime(ctx.n)


def first_element_outside(W: Subspace) -> FqElement:
    for coeffs in itertools.product(range(W.ctx.p), repeat=W.ctx.n):
        x = FqElement(coeffs)
        if x not in W:
            return x
    raise PreconditionError(f"{W} is the whole field")


def construct_linear_counterexample(ctx: FieldCtx):
    """
    Unmatched pair for composite n: A = F_{p^d} (d smallest with 1 < d < n),
    B = (rows of A except the one with pivot 0) ⊕ ⟨g⟩, g the first element outside A.

    Returns:
        (A, B) or None when n is 1 or prime
    """
    if decide_linear_matching_property(ctx):
        return None
    d = min(int(k) for k in galois.divisors(ctx.n) if 1 < k < ctx.n)
    A = subfield(ctx, d).space
    g = first_element_outside(A)
    B = subspace_from_vectors(ctx, [row for row in A.rows if row[0] == 0] + [g])

    basis = BasisSeq(ctx, A.basis)
    if basis_matchable(basis, B, A) is None:
        raise TheoremViolation(f"constructed counterexample in {ctx} satisfies the criterion",
                               context={"A": A, "B": B})
    if linear_locally_matched(A, B):
        raise TheoremViolation(f"constructed counterexample in {ctx} is locally matched",
                               context={"A": A, "B": B})
    return A, B
