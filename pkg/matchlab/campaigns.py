"""
Campaigns
Exhaustive and seeded-random theorem verification over instance families,
the counterexample hunter, and failure reproduction for certificates
"""
import itertools
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from matchlab import metrics
from matchlab.abelian import (
    GroupSubset, cyclic_generators, group_elements, groups_of_order_at_most, make_group,
    make_subset, random_subset, smallest_subgroup_order, subgroup_closure, subgroups, translate,
)
from matchlab.certificates import (
    CertificateStore, basis_matching_certificate, certificate_filename,
    criterion_violator_certificate, failure_certificate, finding_certificate, hall_violator_certificate, kneser_certificate,
    leaf_count, linear_kneser_certificate, local_matching_certificate, matching_certificate,
    mutate_certificate, verify_payload,
)
from matchlab.config import BUDGETS, THEOREM_CONFIG, Settings, load_settings, theorem_bounds
from matchlab.errors import BudgetExceededError, ConfigError, PreconditionError, TheoremViolation
from matchlab.ffext import (
    enumerate_subspaces, full_space, gaussian_binomial, linear_kneser_verify, make_field,
    ordered_basis_count, proper_subfields, random_basis, random_subspace, subspace_from_vectors,
)
from matchlab.linear_matching import (
    BasisSeq, basis_matchable, construct_linear_counterexample,
    decide_linear_matching_property, find_matched_basis, is_matched, linear_locally_matched,
    local_implies_matched_check, primitive_check, search_matched_basis, strong_matching_check,
    strong_matching_exists,
)
from matchlab.matching import (
    Matching, brute_force_matching, construct_counterexample, decide_matching_property,
    find_local_matching, find_matching, is_locally_matched, kneser_verify,
)
from matchlab.schemas import emit_instance, parse_instance, pretty_json

logger = logging.getLogger(__name__)

# Pairs this small are also checked against the bijection oracle
ORACLE_CROSS_CHECK_SIZE = 4

# Class of a random draw whose generator gave up
UNDRAWN_CLASS = "undrawn"


# =============================================================================
# CONFIG AND REPORT
# =============================================================================

class CampaignConfig(BaseModel):
    """One campaign run; identical configs give byte-identical report.json"""

    model_config = ConfigDict(extra="forbid")

    target: str
    mode: Literal["exhaustive", "random"] = "random"
    trials: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    jobs: int = Field(1, ge=1)
    out: Optional[str] = None
    bounds: dict = {}
    html: bool = False


def make_campaign_config(**values) -> CampaignConfig:
    """
    Validate campaign options.

    Raises:
        ConfigError: unknown theorem id or invalid option values
    """
    target = values.get("target")
    if target not in THEOREM_CONFIG:
        raise ConfigError(f"Unknown theorem id '{target}'; choose from {', '.join(THEOREM_CONFIG)}")
    try:
        return CampaignConfig.model_validate({k: v for k, v in values.items() if v is not None})
    except ValidationError as e:
        raise ConfigError(f"Invalid campaign config: {e}")


@dataclass
class CampaignReport:
    """report is the deterministic JSON body; wall time is kept out of it"""

    config: CampaignConfig
    report: dict
    outcomes: pd.DataFrame
    summary: pd.DataFrame
    wall_time: float
    certificate_paths: list = field(default_factory=list)

    @property
    def failures(self) -> list:
        return self.report["failures"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return self.report


@dataclass
class Verdict:
    status: str = "ok"
    message: str = ""
    flags: dict = field(default_factory=dict)
    certificates: list = field(default_factory=list)


# =============================================================================
# SEEDING AND COUNTING
# =============================================================================

def instance_rng(seed: int, index: int):
    """Generator for instance `index`; independent of how instances are partitioned"""
    return np.random.default_rng([seed, index])


def sample_seed(seed: int, index: int) -> int:
    """32-bit seed for the sampled checks of one instance"""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _pair_count(n_left: int, n_right: int, sizes) -> int:
    return sum(math.comb(n_left, k) * math.comb(n_right, k) for k in sizes)


def _subset_pairs(group, sizes, left=None, right=None):
    """(A, B) over k-subsets of left x right for k in sizes, lexicographic"""
    left = group_elements(group) if left is None else left
    right = tuple(x for x in group_elements(group) if not x.is_zero) if right is None else right
    for k in sizes:
        for a in itertools.combinations(left, k):
            A = GroupSubset(group, a)
            for b in itertools.combinations(right, k):
                yield A, GroupSubset(group, b)


def _subspace_pairs(ctx, dims, budget: int):
    full = full_space(ctx)
    for m in dims:
        spaces = list(enumerate_subspaces(full, m, budget))
        for A in spaces:
            for B in spaces:
                yield A, B


def _subspace_pair_count(ctx, dims) -> int:
    return sum(gaussian_binomial(ctx.n, m, ctx.p) ** 2 for m in dims)


def _random_avoiding_one(ctx, m: int, rng, max_attempts: int = 1000):
    """Random m-dimensional subspace not containing 1"""
    for _ in range(max_attempts):
        B = random_subspace(ctx, m, rng)
        if ctx.one not in B:
            return B
    raise PreconditionError(f"no {m}-dimensional subspace of {ctx} without 1 in {max_attempts} draws")


# =============================================================================
# TARGETS
# =============================================================================

class CampaignTarget:
    """
    One theorem id: where instances come from and what is checked on each.

    Exhaustive instances come in canonical order; random instance i is drawn from
    instance_rng(seed, i) alone.
    """

    name = None
    optional_bounds = ()

    def __init__(self, bounds: dict, settings: Settings):
        allowed = set(THEOREM_CONFIG[self.name]["bounds"]) | set(self.optional_bounds)
        unknown = set(bounds) - allowed
        if unknown:
            raise ConfigError(f"Unknown bounds for {self.name}: {', '.join(sorted(unknown))}")
        self.bounds = bounds
        self.settings = settings

    def bound(self, key, default=None):
        value = self.bounds.get(key, default)
        if value is None:
            raise ConfigError(f"{self.name} needs the bound '{key}'")
        return value

    def exhaustive_count(self) -> int:
        raise ConfigError(f"{self.name} has no exhaustive mode")

    def exhaustive_instances(self):
        raise ConfigError(f"{self.name} has no exhaustive mode")

    def random_count(self, trials: int) -> int:
        return trials

    def random_instance(self, index: int, rng) -> dict:
        raise NotImplementedError

    def check(self, instance: dict, seed: int) -> Verdict:
        raise NotImplementedError

    def count(self, mode: str, trials: int) -> int:
        return self.exhaustive_count() if mode == "exhaustive" else self.random_count(trials)

    def instance_class(self, instance: dict) -> str:
        if "group" in instance:
            return str(instance["group"])
        return f"{instance['field']} dim {instance['A'].dim}"

    def parse(self, payload: dict) -> dict:
        return parse_instance(payload)

    def emit(self, instance: dict) -> dict:
        return emit_instance(instance)


# -----------------------------------------------------------------------------
# Groups
# -----------------------------------------------------------------------------

class LocalImpliesMatched(CampaignTarget):
    """Every pair (A, B) with #A = #B, 0 not in B over all groups up to max_order"""

    name = "thm31"

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        self.groups = groups_of_order_at_most(int(self.bound("max_order")))

    def exhaustive_count(self) -> int:
        return sum(_pair_count(G.order, G.order - 1, range(1, G.order)) for G in self.groups)

    def exhaustive_instances(self):
        for G in self.groups:
            for A, B in _subset_pairs(G, range(1, G.order)):
                yield {"group": G, "A": A, "B": B}

    def random_instance(self, index, rng):
        G = self.groups[int(rng.integers(len(self.groups)))]
        k = int(rng.integers(1, G.order))
        return {"group": G, "A": random_subset(G, k, rng), "B": random_subset(G, k, rng, exclude_zero=True)}

    def check(self, instance, seed):
        A, B = instance["A"], instance["B"]
        result = find_matching(A, B)
        matched = isinstance(result, Matching)
        local = is_locally_matched(A, B)
        flags = {"matched": matched, "locally_matched": local.ok}

        if len(A) <= ORACLE_CROSS_CHECK_SIZE:
            if (brute_force_matching(A, B) is not None) != matched:
                return Verdict("failure", "matching search disagrees with the bijection oracle", flags)
        if local.ok and not matched:
            return Verdict("failure", "locally matched but not matched", flags,
                           [hall_violator_certificate(result)])
        return Verdict("ok", flags=flags)


class MatchingPropertyTarget(CampaignTarget):
    """Prime cyclic groups: every pair matched. Other groups: the constructed pair is not."""

    name = "thm35"

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        self.primes = [make_group(0, [p]) for p in self.bound("primes", [])]
        self.counter_groups = (
            [make_group(0, [n]) for n in self.bound("composites", [])]
            + [make_group(0, t) for t in self.bound("extra_groups", [])]
        )
        for G in self.primes:
            if not decide_matching_property(G):
                raise ConfigError(f"{G} is listed as prime cyclic but lacks the matching property")
        for G in self.counter_groups:
            if decide_matching_property(G):
                raise ConfigError(f"{G} has the matching property; no counterexample to build")

    def _counterexample(self, G) -> dict:
        try:
            A, B = construct_counterexample(G)
        except TheoremViolation as e:
            # keep the pair so check() reports it as a failure
            A, B = e.context["A"], e.context["B"]
        return {"group": G, "A": A, "B": B}

    def exhaustive_count(self) -> int:
        return len(self.counter_groups) + sum(
            _pair_count(G.order, G.order - 1, range(1, G.order)) for G in self.primes
        )

    def exhaustive_instances(self):
        for G in self.counter_groups:
            yield self._counterexample(G)
        for G in self.primes:
            for A, B in _subset_pairs(G, range(1, G.order)):
                yield {"group": G, "A": A, "B": B}

    def random_count(self, trials):
        return len(self.counter_groups) + (trials if self.primes else 0)

    def random_instance(self, index, rng):
        if index < len(self.counter_groups):
            return self._counterexample(self.counter_groups[index])
        G = self.primes[int(rng.integers(len(self.primes)))]
        k = int(rng.integers(1, G.order))
        return {"group": G, "A": random_subset(G, k, rng), "B": random_subset(G, k, rng, exclude_zero=True)}

    def check(self, instance, seed):
        G, A, B = instance["group"], instance["A"], instance["B"]
        result = find_matching(A, B)
        matched = isinstance(result, Matching)
        flags = {"matched": matched}

        if decide_matching_property(G):
            if not matched:
                return Verdict("failure", f"unmatched pair in {G}", flags, [hall_violator_certificate(result)])
            return Verdict("ok", flags=flags)

        if matched:
            return Verdict("failure", f"constructed counterexample in {G} is matched", flags,
                           [matching_certificate(result)])
        if len(A) <= self.settings.bijection_oracle_limit and brute_force_matching(
                A, B, self.settings.bijection_oracle_limit) is not None:
            return Verdict("failure", f"bijection oracle matches the counterexample in {G}", flags)
        return Verdict("finding", flags=flags, certificates=[
            finding_certificate("group_counterexample", instance),
            hall_violator_certificate(result),
        ])


class GeneratorTargets(CampaignTarget):
    """Cyclic Z/n with every element of B a generator"""

    name = "thm41"

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        self.groups = [make_group(0, [n]) for n in range(2, int(self.bound("max_order")) + 1)]

    def exhaustive_count(self) -> int:
        return sum(
            _pair_count(G.order, len(cyclic_generators(G)), range(1, len(cyclic_generators(G)) + 1))
            for G in self.groups
        )

    def exhaustive_instances(self):
        for G in self.groups:
            gens = tuple(cyclic_generators(G))
            for A, B in _subset_pairs(G, range(1, len(gens) + 1), right=gens):
                yield {"group": G, "A": A, "B": B}

    def random_instance(self, index, rng):
        G = self.groups[int(rng.integers(len(self.groups)))]
        gens = cyclic_generators(G)
        k = int(rng.integers(1, len(gens) + 1))
        A = random_subset(G, k, rng)
        picks = rng.choice(len(gens), size=k, replace=False)
        B = GroupSubset(G, tuple(sorted(gens[int(i)] for i in picks)))
        return {"group": G, "A": A, "B": B}

    def check(self, instance, seed):
        result = find_matching(instance["A"], instance["B"])
        if isinstance(result, Matching):
            return Verdict("ok", flags={"matched": True})
        return Verdict("failure", "generator targets not matched", {"matched": False},
                       [hall_violator_certificate(result)])


class SmallPairs(CampaignTarget):
    """1 < #A = #B < n(G), n(G) the smallest order of a nonzero subgroup"""

    name = "cor36"

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        self.groups = [make_group(0, t) for t in self.bound("groups")]
        for G in self.groups:
            if not G.is_finite or smallest_subgroup_order(G) <= 2:
                raise ConfigError(f"{G} admits no pair sizes 1 < k < n(G)")

    def _sizes(self, G):
        return range(2, smallest_subgroup_order(G))

    def exhaustive_count(self) -> int:
        return sum(_pair_count(G.order, G.order - 1, self._sizes(G)) for G in self.groups)

    def exhaustive_instances(self):
        for G in self.groups:
            for A, B in _subset_pairs(G, self._sizes(G)):
                yield {"group": G, "A": A, "B": B}

    def random_instance(self, index, rng):
        G = self.groups[index % len(self.groups)]
        sizes = self._sizes(G)
        k = int(rng.integers(sizes.start, sizes.stop))
        return {"group": G, "A": random_subset(G, k, rng), "B": random_subset(G, k, rng, exclude_zero=True)}

    def check(self, instance, seed):
        result = find_matching(instance["A"], instance["B"])
        if isinstance(result, Matching):
            return Verdict("ok", flags={"matched": True})
        return Verdict("failure", "pair below n(G) not matched", {"matched": False},
                       [hall_violator_certificate(result)])


class KneserTarget(CampaignTarget):
    """
    #(A+B) >= #A + #B - #H. A quarter of the random draws are coset pairs a+H, b+H,
    which are tight with a nontrivial stabilizer.
    """

    name = "kneser"

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        groups = [make_group(0, [n]) for n in range(2, int(self.bound("max_cyclic", 1)) + 1)]
        groups += [make_group(0, t) for t in self.bound("products", [])]
        # dedupe, first occurrence wins
        self.groups = list(dict.fromkeys(groups))
        if not self.groups:
            raise ConfigError("kneser needs at least one group")

    def exhaustive_count(self) -> int:
        return sum((2 ** G.order - 1) ** 2 for G in self.groups)

    def exhaustive_instances(self):
        for G in self.groups:
            elements = group_elements(G)
            subsets = [
                GroupSubset(G, combo)
                for k in range(1, G.order + 1)
                for combo in itertools.combinations(elements, k)
            ]
            for A in subsets:
                for B in subsets:
                    yield {"group": G, "A": A, "B": B}

    def random_instance(self, index, rng):
        G = self.groups[int(rng.integers(len(self.groups)))]
        elements = group_elements(G)
        if rng.random() < 0.25:
            nontrivial = [H for H in subgroups(G) if not H.is_trivial]
            H = nontrivial[int(rng.integers(len(nontrivial)))]
            A = translate(H.elements, elements[int(rng.integers(G.order))])
            B = translate(H.elements, elements[int(rng.integers(G.order))])
            return {"group": G, "A": A, "B": B}
        A = random_subset(G, int(rng.integers(1, G.order + 1)), rng)
        B = random_subset(G, int(rng.integers(1, G.order + 1)), rng)
        return {"group": G, "A": A, "B": B}

    def check(self, instance, seed):
        cert = kneser_verify(instance["A"], instance["B"])
        flags = {"slack": cert.slack, "stabilizer_order": cert.H.order}
        if cert.slack == 0 and not cert.H.is_trivial:
            claim = kneser_certificate(cert)["claim"]
            return Verdict("finding", flags=flags,
                           certificates=[finding_certificate("kneser_tight", instance, **claim)])
        return Verdict("ok", flags=flags)


# -----------------------------------------------------------------------------
# Finite fields
# -----------------------------------------------------------------------------

class LinearTarget(CampaignTarget):
    """Shared field list: index i of a random campaign uses field i mod #fields"""

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        self.fields = [make_field(p, n) for p, n in self.bound("fields")]
        if not self.fields:
            raise ConfigError(f"{self.name} needs at least one field")

    def field_for(self, index: int):
        return self.fields[index % len(self.fields)]

    def dims(self, ctx) -> range:
        return range(1, ctx.n)

    def exhaustive_count(self) -> int:
        return sum(_subspace_pair_count(ctx, self.dims(ctx)) for ctx in self.fields)

    def exhaustive_instances(self):
        for ctx in self.fields:
            for A, B in _subspace_pairs(ctx, self.dims(ctx), self.settings.subspace_budget):
                yield {"field": ctx, "A": A, "B": B, "a_basis": BasisSeq(ctx, A.basis)}

    def basis_mode(self, A) -> tuple:
        """Exhaustive over bases when they are fewer than the trial count"""
        trials = int(self.bounds.get("basis_trials", self.settings.basis_trials))
        return ("exhaustive" if ordered_basis_count(A) <= trials else "sample"), trials

    def local_options(self) -> dict:
        return {
            "subspace_budget": self.settings.subspace_budget,
            "subspace_trials": self.settings.subspace_trials,
            "basis_budget": self.settings.ordered_basis_budget,
            "basis_trials": int(self.bounds.get("basis_trials", self.settings.basis_trials)),
        }


class CriterionOracle(LinearTarget):
    """Dimension criterion against the exhaustive matched-basis search"""

    name = "thm24"

    def dims(self, ctx):
        return range(1, min(ctx.n, int(self.bound("max_dim"))) + 1)

    def random_count(self, trials):
        return trials * len(self.fields)

    def random_instance(self, index, rng):
        ctx = self.field_for(index)
        dims = self.dims(ctx)
        m = int(rng.integers(dims.start, dims.stop))
        A = random_subspace(ctx, m, rng)
        B = random_subspace(ctx, m, rng)
        return {"field": ctx, "A": A, "B": B, "a_basis": BasisSeq(ctx, random_basis(A, rng))}

    def check(self, instance, seed):
        A, B, a_basis = instance["A"], instance["B"], instance["a_basis"]
        violator = basis_matchable(a_basis, B, A)
        found = search_matched_basis(a_basis, B, A, budget=self.settings.ordered_basis_budget)
        criterion = violator is None
        flags = {"criterion_ok": criterion}

        if criterion != (found is not None):
            evidence = ([basis_matching_certificate(found, B)] if found is not None
                        else [])
            if violator is not None:
                evidence.append(criterion_violator_certificate(violator, B, A))
            return Verdict("failure", "criterion and exhaustive search disagree", flags, evidence)
        if criterion:
            find_matched_basis(a_basis, B, A)
        return Verdict("ok", flags=flags)


class PrimitiveTargets(LinearTarget):
    """Primitive B: every basis of A satisfies the criterion"""

    name = "thm42"

    def dims(self, ctx):
        proper = proper_subfields(ctx)
        if not proper:
            raise ConfigError(f"{ctx} has no proper subfield")
        return range(1, ctx.n - max(desc.d for desc in proper) + 1)

    def random_instance(self, index, rng):
        ctx = self.field_for(index)
        dims = self.dims(ctx)
        m = int(rng.integers(dims.start, dims.stop))
        for _ in range(1000):
            B = random_subspace(ctx, m, rng)
            if primitive_check(B):
                break
        else:
            raise PreconditionError(f"no primitive {m}-dimensional subspace of {ctx} in 1000 draws")
        A = random_subspace(ctx, m, rng)
        return {"field": ctx, "A": A, "B": B, "a_basis": BasisSeq(ctx, random_basis(A, rng))}

    def check(self, instance, seed):
        A, B, a_basis = instance["A"], instance["B"], instance["a_basis"]
        if not primitive_check(B):
            return Verdict("skipped", flags={"criterion_ok": False})
        violator = basis_matchable(a_basis, B, A)
        if violator is not None:
            return Verdict("failure", "primitive target fails the criterion", {"criterion_ok": False},
                           [criterion_violator_certificate(violator, B, A)])
        find_matched_basis(a_basis, B, A)
        return Verdict("ok", flags={"criterion_ok": True})


class LinearLocalImpliesMatched(LinearTarget):
    """1 not in B; local matchedness must force matchedness"""

    name = "thm51"

    def random_instance(self, index, rng):
        ctx = self.field_for(index)
        m = int(rng.integers(1, ctx.n))
        B = _random_avoiding_one(ctx, m, rng)
        A = random_subspace(ctx, m, rng)
        return {"field": ctx, "A": A, "B": B}

    def check(self, instance, seed):
        A, B = instance["A"], instance["B"]
        if A.ctx.one in B:
            return Verdict("skipped", flags={"matched": False, "locally_matched": False})
        mode, trials = self.basis_mode(A)
        report = local_implies_matched_check(A, B, mode=mode, trials=trials, seed=seed, **self.local_options())
        return Verdict("ok", flags={"matched": report.matched.ok, "locally_matched": report.local.ok})


class StrongMatchings(LinearTarget):
    """⟨AB⟩ ∩ A = 0: matched is asserted, local matchedness is a finding when it fails"""

    name = "remark56"
    optional_bounds = ("max_dim", "max_attempts")

    def dims(self, ctx):
        return range(1, min(ctx.n - 1, int(self.bounds.get("max_dim", 2))) + 1)

    def random_instance(self, index, rng):
        ctx = self.field_for(index)
        dims = self.dims(ctx)
        attempts = int(self.bounds.get("max_attempts", 2000))
        m = int(rng.integers(dims.start, dims.stop))
        # strong pairs thin out with the dimension; fall back one dimension at a time
        for dim in range(m, 0, -1):
            for _ in range(attempts):
                A = random_subspace(ctx, dim, rng)
                B = random_subspace(ctx, dim, rng)
                if strong_matching_exists(A, B):
                    return {"field": ctx, "A": A, "B": B}
            logger.debug("No strong pair of dimension %s in %s after %s draws", dim, ctx, attempts)
        raise PreconditionError(f"no strong pair in {ctx}")

    def check(self, instance, seed):
        A, B = instance["A"], instance["B"]
        if not strong_matching_exists(A, B):
            return Verdict("skipped", flags={"strong": False, "matched": False, "locally_matched": False})
        mode, trials = self.basis_mode(A)
        report = strong_matching_check(A, B, mode=mode, trials=trials, seed=seed, **self.local_options())
        local_ok = report.local is None or report.local.ok
        flags = {"strong": True, "matched": report.matched.ok, "locally_matched": local_ok}
        if report.finding:
            logger.info("Strong matching without local matchedness: A=%s B=%s", A, B)
            return Verdict("finding", flags=flags,
                           certificates=[finding_certificate("strong_not_local", instance)])
        return Verdict("ok", flags=flags)


class LinearKneserTarget(LinearTarget):
    name = "linear_kneser"

    def dims(self, ctx):
        return range(1, ctx.n + 1)

    def exhaustive_count(self) -> int:
        return sum(
            sum(gaussian_binomial(ctx.n, m, ctx.p) for m in self.dims(ctx)) ** 2
            for ctx in self.fields
        )

    def exhaustive_instances(self):
        for ctx in self.fields:
            full = full_space(ctx)
            spaces = [
                W for m in self.dims(ctx)
                for W in enumerate_subspaces(full, m, self.settings.subspace_budget)
            ]
            for A in spaces:
                for B in spaces:
                    yield {"field": ctx, "A": A, "B": B}

    def random_instance(self, index, rng):
        ctx = self.field_for(index)
        A = random_subspace(ctx, int(rng.integers(1, ctx.n + 1)), rng)
        B = random_subspace(ctx, int(rng.integers(1, ctx.n + 1)), rng)
        return {"field": ctx, "A": A, "B": B}

    def instance_class(self, instance):
        return str(instance["field"])

    def check(self, instance, seed):
        cert = linear_kneser_verify(instance["A"], instance["B"])
        ctx = instance["field"]
        return Verdict("ok", flags={"slack": cert.slack, "stabilizer_order": ctx.p ** cert.H.d})


class LinearMatchingProperty(LinearTarget):
    """Prime degree: every pair matched. Composite degree: the constructed pair is not."""

    name = "thm25"

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        if any(ctx.n == 1 for ctx in self.fields):
            raise ConfigError("thm25 fields need degree >= 2")
        self.counter_fields = [ctx for ctx in self.fields if not decide_linear_matching_property(ctx)]
        self.prime_fields = [ctx for ctx in self.fields if decide_linear_matching_property(ctx)]

    def _counterexample(self, ctx) -> dict:
        try:
            A, B = construct_linear_counterexample(ctx)
        except TheoremViolation as e:
            A, B = e.context["A"], e.context["B"]
        return {"field": ctx, "A": A, "B": B, "a_basis": BasisSeq(ctx, A.basis)}

    def exhaustive_count(self) -> int:
        return len(self.counter_fields) + sum(
            _subspace_pair_count(ctx, self.dims(ctx)) for ctx in self.prime_fields
        )

    def exhaustive_instances(self):
        for ctx in self.counter_fields:
            yield self._counterexample(ctx)
        for ctx in self.prime_fields:
            for A, B in _subspace_pairs(ctx, self.dims(ctx), self.settings.subspace_budget):
                yield {"field": ctx, "A": A, "B": B}

    def random_count(self, trials):
        return len(self.counter_fields) + (trials if self.prime_fields else 0)

    def random_instance(self, index, rng):
        if index < len(self.counter_fields):
            return self._counterexample(self.counter_fields[index])
        ctx = self.prime_fields[(index - len(self.counter_fields)) % len(self.prime_fields)]
        m = int(rng.integers(1, ctx.n))
        B = _random_avoiding_one(ctx, m, rng)
        return {"field": ctx, "A": random_subspace(ctx, m, rng), "B": B}

    def check(self, instance, seed):
        ctx, A, B = instance["field"], instance["A"], instance["B"]
        if decide_linear_matching_property(ctx):
            if ctx.one in B:
                return Verdict("skipped", flags={"matched": False, "locally_matched": False})
            mode, trials = self.basis_mode(A)
            report = is_matched(A, B, mode=mode, trials=trials, seed=seed,
                                budget=self.settings.ordered_basis_budget)
            flags = {"matched": report.ok, "locally_matched": True}
            if not report.ok:
                return Verdict("failure", f"unmatched pair in {ctx}", flags,
                               [criterion_violator_certificate(report.violator, B, A)])
            return Verdict("ok", flags=flags)

        a_basis = instance.get("a_basis")
        if a_basis is None:
            a_basis = BasisSeq(ctx, A.basis)
        violator = basis_matchable(a_basis, B, A)
        local = linear_locally_matched(A, B, **self.local_options())
        flags = {"matched": violator is None, "locally_matched": local.ok}
        if violator is None:
            return Verdict("failure", f"constructed counterexample in {ctx} satisfies the criterion", flags)
        if local.ok:
            return Verdict("failure", f"unmatched pair in {ctx} is locally matched", flags,
                           [criterion_violator_certificate(violator, B, A)])
        return Verdict("finding", flags=flags, certificates=[
            finding_certificate("linear_counterexample", {**instance, "a_basis": a_basis}, locally_matched=False),
            criterion_violator_certificate(violator, B, A),
        ])


# -----------------------------------------------------------------------------
# Certificates
# -----------------------------------------------------------------------------

def base_certificates() -> list:
    """One emitted certificate of each mathematical kind, all valid"""
    z8 = make_group(0, [8])
    A, B = make_subset(z8, [0, 2, 6]), make_subset(z8, [1, 3, 4])
    H = subgroup_closure(z8, [z8.element(4)])

    z4 = make_group(0, [4])
    cA, cB = construct_counterexample(z4)

    z12 = make_group(0, [12])
    kA, kB = make_subset(z12, [0, 4, 8]), make_subset(z12, [1, 5, 9])

    f4 = make_field(2, 2)
    lA = f4.element([1, 0])
    f4_one = BasisSeq(f4, (lA,))
    f16 = make_field(2, 4)
    uA, uB = construct_linear_counterexample(f16)
    u_basis = BasisSeq(f16, uA.basis)

    line, omega = subspace_from_vectors(f4, [[1, 0]]), subspace_from_vectors(f4, [[0, 1]])

    return [
        matching_certificate(find_matching(A, B)),
        local_matching_certificate(A, B, find_local_matching(A, B, H)),
        hall_violator_certificate(find_matching(cA, cB)),
        finding_certificate("group_counterexample", {"group": z4, "A": cA, "B": cB}),
        kneser_certificate(kneser_verify(kA, kB)),
        basis_matching_certificate(find_matched_basis(f4_one, omega, line), omega),
        criterion_violator_certificate(basis_matchable(u_basis, uB, uA), uB, uA),
        linear_kneser_certificate(linear_kneser_verify(uA, uB)),
        finding_certificate("linear_counterexample", {"field": f16, "A": uA, "B": uB, "a_basis": u_basis},
                            locally_matched=False),
    ]


class TamperTarget(CampaignTarget):
    """Single-leaf mutations of valid certificates; none may verify"""

    name = "tamper"

    def __init__(self, bounds, settings):
        super().__init__(bounds, settings)
        self._bases = None

    @property
    def bases(self) -> list:
        if self._bases is None:
            self._bases = base_certificates()
        return self._bases

    def exhaustive_count(self) -> int:
        return sum(leaf_count(base) for base in self.bases)

    def exhaustive_instances(self):
        for b, base in enumerate(self.bases):
            for leaf in range(leaf_count(base)):
                mutated = mutate_certificate(base, np.random.default_rng([b, leaf]), leaf=leaf)
                yield {"certificate": mutated, "base_kind": base["kind"]}

    def random_instance(self, index, rng):
        base = self.bases[index % len(self.bases)]
        return {"certificate": mutate_certificate(base, rng), "base_kind": base["kind"]}

    def instance_class(self, instance):
        return str(instance.get("base_kind", "certificate"))

    def parse(self, payload):
        return payload

    def emit(self, instance):
        return {"certificate": instance["certificate"]}

    def check(self, instance, seed):
        result = verify_payload(instance["certificate"], self.settings.bijection_oracle_limit)
        if result.ok:
            return Verdict("failure", "mutated certificate still verifies")
        return Verdict("ok")


TARGETS = {
    cls.name: cls
    for cls in (
        LocalImpliesMatched, MatchingPropertyTarget, GeneratorTargets, SmallPairs, KneserTarget,
        CriterionOracle, PrimitiveTargets, LinearLocalImpliesMatched, StrongMatchings,
        LinearKneserTarget, LinearMatchingProperty, TamperTarget,
    )
}


def make_target(target: str, bounds: dict = None, settings: Settings = None) -> CampaignTarget:
    settings = Settings() if settings is None else settings
    if target not in TARGETS:
        raise ConfigError(f"Unknown theorem id '{target}'; choose from {', '.join(TARGETS)}")
    resolved = theorem_bounds(target, settings)
    resolved.update(bounds or {})
    return TARGETS[target](resolved, settings)


# =============================================================================
# RUNNING
# =============================================================================

def _run_one(target: CampaignTarget, index: int, instance: dict, seed: int) -> dict:
    s = sample_seed(seed, index)
    try:
        verdict = target.check(instance, s)
    except TheoremViolation as e:
        verdict = Verdict("failure", str(e))
    except (PreconditionError, BudgetExceededError) as e:
        logger.warning("%s instance %s skipped: %s", target.name, index, e)
        verdict = Verdict("skipped", str(e))

    certificates = list(verdict.certificates)
    if verdict.status == "failure":
        certificates.insert(0, failure_certificate(target.name, target.emit(instance), verdict.message, s))
        logger.error("%s instance %s failed: %s", target.name, index, verdict.message)

    row = {
        "index": index,
        "instance_class": target.instance_class(instance),
        "status": verdict.status,
        **verdict.flags,
    }
    return {"row": row, "message": verdict.message, "certificates": certificates}


def _skipped_draw(target: CampaignTarget, index: int, error: Exception) -> dict:
    """Outcome for a random draw that produced no instance"""
    logger.warning("%s instance %s skipped: %s", target.name, index, error)
    row = {"index": index, "instance_class": UNDRAWN_CLASS, "status": "skipped"}
    return {"row": row, "message": str(error), "certificates": []}


def _run_range(job: tuple) -> list:
    """Worker entry point: outcomes of instances start..stop-1, in order"""
    target_id, bounds, settings, mode, seed, start, stop = job
    target = make_target(target_id, bounds, settings)

    outcomes = []
    if mode == "exhaustive":
        for index, instance in enumerate(itertools.islice(target.exhaustive_instances(), start, stop), start):
            outcomes.append(_run_one(target, index, instance, seed))
            _log_progress(target_id, settings, index)
        return outcomes

    for index in range(start, stop):
        try:
            instance = target.random_instance(index, instance_rng(seed, index))
        except (PreconditionError, BudgetExceededError) as e:
            outcomes.append(_skipped_draw(target, index, e))
        else:
            outcomes.append(_run_one(target, index, instance, seed))
        _log_progress(target_id, settings, index)
    return outcomes


def _log_progress(target_id: str, settings: Settings, index: int):
    if settings.progress_every and (index + 1) % settings.progress_every == 0:
        logger.info("%s: %s instances checked", target_id, metrics.format_number(index + 1))


def _partition(total: int, jobs: int) -> list:
    """Contiguous index ranges; several per worker to even out the load"""
    if total == 0:
        return []
    chunks = 1 if jobs == 1 else jobs * 4
    size = math.ceil(total / chunks)
    return [(start, min(start + size, total)) for start in range(0, total, size)]


def run_campaign(config: CampaignConfig, settings: Settings = None) -> CampaignReport:
    """
    Run one campaign and, when config.out is set, write its artefacts.

    Files in config.out: report.json (deterministic), timing.json, summary.csv,
    summary.html with config.html, and certificates/ for every failure and the
    first max_finding_certificates findings.

    Raises:
        BudgetExceededError: exhaustive instance count over the budget
        ConfigError: bad bounds
    """
    settings = load_settings() if settings is None else settings
    target = make_target(config.target, config.bounds, settings)

    total = target.count(config.mode, config.trials)
    if config.mode == "exhaustive" and total > settings.exhaustive_instance_budget:
        raise BudgetExceededError(
            f"{config.target}: {total} instances exceed the exhaustive budget "
            f"{settings.exhaustive_instance_budget}; use random mode or smaller bounds"
        )

    logger.info("Campaign %s: mode=%s trials=%s seed=%s jobs=%s, %s instances",
                config.target, config.mode, config.trials, config.seed, config.jobs,
                metrics.format_number(total))
    started = time.perf_counter()

    jobs = [
        (config.target, target.bounds, settings, config.mode, config.seed, start, stop)
        for start, stop in _partition(total, config.jobs)
    ]
    if config.jobs == 1:
        chunks = [_run_range(job) for job in jobs]
    else:
        # map() yields in submission order, so the merge restores instance order
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            chunks = list(pool.map(_run_range, jobs))
    outcomes = [outcome for chunk in chunks for outcome in chunk]

    wall_time = time.perf_counter() - started
    return _assemble_report(config, target, settings, outcomes, wall_time)


def _assemble_report(config, target, settings, outcomes, wall_time) -> CampaignReport:
    store = CertificateStore(Path(config.out) / "certificates") if config.out else None

    def archive(payload) -> str:
        if store is not None:
            store.write(payload)
        return certificate_filename(payload)

    failures, finding_files, written = [], [], []
    for outcome in outcomes:
        row = outcome["row"]
        if row["status"] == "failure":
            names = [archive(payload) for payload in outcome["certificates"]]
            written.extend(names)
            failures.append({
                "index": row["index"],
                "instance_class": row["instance_class"],
                "message": outcome["message"],
                "certificate": names[0],
                "evidence": names[1:],
            })
        elif row["status"] == "finding" and len(finding_files) < settings.max_finding_certificates:
            names = [archive(payload) for payload in outcome["certificates"]]
            written.extend(names)
            finding_files.extend(names[:1])
            logger.info("Finding at instance %s (%s): %s", row["index"], row["instance_class"], names[0])

    frame = metrics.outcomes_frame([outcome["row"] for outcome in outcomes])
    kpis = metrics.calculate_kpis(frame)
    summary = metrics.calculate_class_metrics(frame)

    report = {
        "config": config.model_dump(mode="json"),
        "target": {"id": target.name, **{k: THEOREM_CONFIG[target.name][k] for k in ("domain", "description")}},
        "bounds": target.bounds,
        "budgets": {key: getattr(settings, key) for key in BUDGETS},
        "instances": kpis["instances"],
        "kpis": kpis,
        "failures": failures,
        "findings": kpis["findings"],
        "finding_certificates": finding_files,
        "certificates": sorted(set(written)),
        "summary": metrics.summary_records(summary),
        "ok": not failures,
    }
    # bounds may hold tuples; round-trip through JSON so the dict matches the file
    report = json.loads(pretty_json(report))

    paths = []
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(pretty_json(report) + "\n", encoding="utf-8")
        (out / "timing.json").write_text(pretty_json({"wall_time_seconds": round(wall_time, 3)}) + "\n",
                                         encoding="utf-8")
        metrics.prepare_export_data(summary).to_csv(out / "summary.csv", index=False)
        if config.html:
            from matchlab.charts import write_summary_html

            write_summary_html(summary, out / "summary.html",
                               f"{target.name}: outcomes by instance class, "
                               f"success rate {metrics.format_percentage(kpis['success_rate'])}")
        paths = [out / "certificates" / name for name in report["certificates"]]

    logger.info("Campaign %s done: %s instances, %s failures, %s findings, success rate %s in %.2fs",
                target.name, metrics.format_number(kpis["instances"]), len(failures),
                kpis["findings"], metrics.format_percentage(kpis["success_rate"]), wall_time)
    return CampaignReport(config, report, frame, summary, wall_time, paths)


def reproduce_failure(target: str, instance: dict, seed: int = 0) -> tuple:
    """
    Re-run a target's check on an emitted instance.

    Returns:
        (True, message) when the failure reproduces, else (False, detail)
    """
    campaign_target = make_target(target)
    parsed = campaign_target.parse(instance)
    try:
        verdict = campaign_target.check(parsed, seed)
    except TheoremViolation as e:
        return True, str(e)
    if verdict.status == "failure":
        return True, verdict.message
    return False, "failure does not reproduce"


# =============================================================================
# COUNTEREXAMPLE HUNT
# =============================================================================

@dataclass(frozen=True)
class HuntFinding:
    source: str
    instance: dict
    locally_matched: bool
    certificate: dict


HUNT_DEFAULTS = {
    "group": {"groups": [[4]], "max_order": None, "max_size": None},
    "linear": {"fields": [[2, 4]], "max_dim": 2},
}


def _hunt_bounds(domain: str, bounds: dict) -> dict:
    if domain not in HUNT_DEFAULTS:
        raise ConfigError(f"Unknown hunt domain '{domain}'; choose group or linear")
    unknown = set(bounds or {}) - set(HUNT_DEFAULTS[domain])
    if unknown:
        raise ConfigError(f"Unknown hunt bounds: {', '.join(sorted(unknown))}")
    return {**HUNT_DEFAULTS[domain], **(bounds or {})}


def hunt_counterexample(domain: str, bounds: dict = None, settings: Settings = None) -> list:
    """
    Search for unmatched pairs.

    group: the closed-form construction, then every pair (A, B) up to max_size.
    linear: the construction for composite degrees, then every pair of subspaces
    up to max_dim with 1 not in B; each unmatched pair records whether it is
    locally matched.

    Raises:
        BudgetExceededError: the scan would exceed the exhaustive instance budget
    """
    settings = load_settings() if settings is None else settings
    bounds = _hunt_bounds(domain, bounds)
    if domain == "group":
        findings = _hunt_groups(bounds, settings)
    else:
        findings = _hunt_fields(bounds, settings)
    logger.info("Hunt %s: %s unmatched pairs", domain, metrics.format_number(len(findings)))
    return findings


def _hunt_groups(bounds: dict, settings: Settings) -> list:
    groups = [make_group(0, t) for t in bounds["groups"] or []]
    if bounds["max_order"]:
        groups += groups_of_order_at_most(int(bounds["max_order"]))
    groups = list(dict.fromkeys(groups))

    def sizes(G):
        top = G.order - 1 if bounds["max_size"] is None else min(int(bounds["max_size"]), G.order - 1)
        return range(1, top + 1)

    total = sum(_pair_count(G.order, G.order - 1, sizes(G)) for G in groups)
    if total > settings.exhaustive_instance_budget:
        raise BudgetExceededError(f"hunt would scan {total} pairs, over {settings.exhaustive_instance_budget}")

    findings = []
    for G in groups:
        seen = set()
        pair = construct_counterexample(G)
        if pair is not None:
            instance = {"group": G, "A": pair[0], "B": pair[1]}
            findings.append(HuntFinding("construction", instance, False,
                                        finding_certificate("group_counterexample", instance)))
            seen.add(pair)
        for A, B in _subset_pairs(G, sizes(G)):
            if (A, B) in seen or isinstance(find_matching(A, B), Matching):
                continue
            instance = {"group": G, "A": A, "B": B}
            local = is_locally_matched(A, B)
            findings.append(HuntFinding("scan", instance, local.ok,
                                        finding_certificate("group_counterexample", instance)))
        logger.debug("Hunted %s", G)
    return findings


def _hunt_fields(bounds: dict, settings: Settings) -> list:
    fields = [make_field(p, n) for p, n in bounds["fields"]]
    max_dim = int(bounds["max_dim"])

    def dims(ctx):
        return range(1, min(max_dim, ctx.n - 1) + 1)

    total = sum(_subspace_pair_count(ctx, dims(ctx)) for ctx in fields)
    if total > settings.exhaustive_instance_budget:
        raise BudgetExceededError(f"hunt would scan {total} pairs, over {settings.exhaustive_instance_budget}")

    findings = []
    for ctx in fields:
        seen = set()
        pair = construct_linear_counterexample(ctx)
        if pair is not None:
            A, B = pair
            instance = {"field": ctx, "A": A, "B": B, "a_basis": BasisSeq(ctx, A.basis)}
            findings.append(HuntFinding("construction", instance, False,
                                        finding_certificate("linear_counterexample", instance, locally_matched=False)))
            seen.add(pair)
        for A, B in _subspace_pairs(ctx, dims(ctx), settings.subspace_budget):
            if ctx.one in B or (A, B) in seen:
                continue
            report = is_matched(A, B, mode="exhaustive", budget=settings.ordered_basis_budget)
            if report.ok:
                continue
            local = linear_locally_matched(A, B)
            instance = {"field": ctx, "A": A, "B": B, "a_basis": report.failing_basis}
            findings.append(HuntFinding("scan", instance, local.ok,
                                        finding_certificate("linear_counterexample", instance,
                                                            locally_matched=local.ok)))
        logger.debug("Hunted %s", ctx)
    return findings
