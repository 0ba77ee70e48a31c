"""
Certificates
Self-contained JSON evidence for every claim, a content-addressed store, and a verifier
that re-checks the mathematics from the embedded instance alone
"""
import copy
import functools
import hashlib
import logging
from dataclasses import dataclass
from pathlib import Path

from matchlab.abelian import element_op, make_subset, stabilizer, subgroup_closure, sumset
from matchlab.config import BUDGETS
from matchlab.errors import MatchlabError, SchemaError
from matchlab.ffext import linear_kneser_verify, product_span, stabilizer_subfield
from matchlab.linear_matching import (
    BasisSeq, basis_matchable, criterion_witness, linear_locally_matched,
    matched_basis_failure, strong_matching_exists,
)
from matchlab.matching import (
    HallViolator, Matching, brute_force_matching, find_matching, is_hall_violator,
    is_matching,
)
from matchlab.schemas import (
    canonical_json, emit_basis, emit_element, emit_instance, emit_pairs, emit_subset,
    emit_subspace, load_json, parse_element, parse_instance, parse_subset, parse_subspace,
    pretty_json,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

CERTIFICATE_KINDS = (
    "matching", "hall_violator", "local_matching", "kneser",
    "linear_kneser", "basis_matching", "criterion_violator", "finding", "failure",
)


# =============================================================================
# BUILDERS
# =============================================================================

def digest_of(payload: dict) -> str:
    """sha256 over the canonical JSON of every field except the digest"""
    body = {k: v for k, v in payload.items() if k != "digest"}
    return hashlib.sha256(canonical_json(body).encode("utf-8")).hexdigest()


def make_certificate(kind: str, instance: dict, claim: dict) -> dict:
    """Wrap an emitted instance and claim; instance may be a domain dict or already emitted"""
    if kind not in CERTIFICATE_KINDS:
        raise SchemaError(f"Unknown certificate kind '{kind}'")
    if any(not isinstance(v, (dict, list)) for v in instance.values() if v is not None):
        instance = emit_instance(instance)
    payload = {
        "kind": kind,
        "schema_version": SCHEMA_VERSION,
        "instance": instance,
        "claim": claim,
    }
    payload["digest"] = digest_of(payload)
    return payload


def matching_certificate(matching: Matching) -> dict:
    instance = {"group": matching.A.group, "A": matching.A, "B": matching.B}
    return make_certificate("matching", instance, {"pairs": emit_pairs(matching.pairs)})


def hall_violator_certificate(violator: HallViolator) -> dict:
    instance = {"group": violator.A.group, "A": violator.A, "B": violator.B}
    claim = {"S": emit_subset(violator.S), "U": emit_subset(violator.U)}
    return make_certificate("hall_violator", instance, claim)


def matching_result_certificate(result) -> dict:
    if isinstance(result, Matching):
        return matching_certificate(result)
    return hall_violator_certificate(result)


def local_matching_certificate(A, B, local) -> dict:
    claim = {
        "H": emit_subset(local.H),
        "witness": emit_element(local.witness),
        "A_prime": emit_subset(local.A_prime),
        "pairs": emit_pairs(local.pairs),
    }
    return make_certificate("local_matching", {"group": A.group, "A": A, "B": B}, claim)


def kneser_certificate(cert) -> dict:
    claim = {"C": emit_subset(cert.C), "H": emit_subset(cert.H), "slack": cert.slack}
    return make_certificate("kneser", {"group": cert.A.group, "A": cert.A, "B": cert.B}, claim)


def linear_kneser_certificate(cert) -> dict:
    claim = {
        "AB": emit_subspace(cert.AB),
        "H_degree": cert.H.d,
        "H": emit_subspace(cert.H.space),
        "slack": cert.slack,
    }
    return make_certificate("linear_kneser", {"field": cert.A.ctx, "A": cert.A, "B": cert.B}, claim)


def basis_matching_certificate(matching, B) -> dict:
    instance = {"field": matching.A.ctx, "A": matching.A, "B": B, "a_basis": matching.a_basis}
    return make_certificate("basis_matching", instance, {"b_basis": emit_basis(matching.b_basis)})


def criterion_violator_certificate(violator, B, A) -> dict:
    instance = {"field": A.ctx, "A": A, "B": B, "a_basis": violator.a_basis}
    claim = {
        "J": list(violator.J),
        "witness_space": emit_subspace(violator.witness_space),
        "deficit": violator.deficit,
    }
    return make_certificate("criterion_violator", instance, claim)


def finding_certificate(subkind: str, instance: dict, **details) -> dict:
    """Notable but non-failing observations, e.g. tight Kneser pairs or counterexamples"""
    return make_certificate("finding", instance, {"subkind": subkind, **details})


def failure_certificate(target: str, instance: dict, message: str, seed: int = 0) -> dict:
    """Campaign failure; the verifier re-runs the target check with the recorded seed"""
    claim = {"target": target, "message": message, "seed": int(seed)}
    return make_certificate("failure", instance, claim)


# =============================================================================
# VERIFICATION
# =============================================================================

@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    kind: str = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _verify_matching(instance, claim):
    A, B = instance["A"], instance["B"]
    pairs = [(parse_element(A.group, a), parse_element(A.group, b)) for a, b in claim["pairs"]]
    check = is_matching(A, B, pairs)
    return check.ok, check.detail


def _verify_hall_violator(instance, claim):
    A, B = instance["A"], instance["B"]
    S = parse_subset(A.group, claim["S"])
    U = parse_subset(A.group, claim["U"])
    if is_hall_violator(A, B, S, U):
        return True, ""
    return False, f"S={S} U={U} is not a Hall violator"


def _verify_local_matching(instance, claim):
    A, B = instance["A"], instance["B"]
    group = A.group
    H_elements = parse_subset(group, claim["H"])
    H = subgroup_closure(group, H_elements.elements)
    if H.elements != H_elements:
        return False, "H is not a subgroup"
    if not H.is_proper:
        return False, "H is not proper"
    witness = parse_element(group, claim["witness"])
    if witness not in A or any(x not in A for x in sumset(make_subset(group, [witness]), H.elements)):
        return False, f"{witness}+H ⊄ A"
    target = B.intersection(H.elements)
    if not len(target):
        return False, "H ∩ B is empty"
    pairs = [(parse_element(group, a), parse_element(group, b)) for a, b in claim["pairs"]]
    A_prime = parse_subset(group, claim["A_prime"])
    if sorted(a for a, _ in pairs) != list(A_prime.elements) or not A_prime.issubset(A):
        return False, "A' does not match the pairs"
    if sorted(b for _, b in pairs) != list(target.elements):
        return False, "pairs do not cover H ∩ B exactly once"
    for a, b in pairs:
        s = element_op(group, "add", a, b)
        if s in A:
            return False, f"{a}+{b}={s}∈A"
    return True, ""


def _verify_kneser(instance, claim):
    A, B = instance["A"], instance["B"]
    C = sumset(A, B)
    H = stabilizer(C)
    if C != parse_subset(A.group, claim["C"]):
        return False, "C is not A+B"
    if H.elements != parse_subset(A.group, claim["H"]):
        return False, "H is not the stabilizer of C"
    slack = len(C) - len(A) - len(B) + H.order
    if slack != claim["slack"]:
        return False, f"recomputed slack {slack} != {claim['slack']}"
    if slack < 0:
        return False, "negative slack"
    return True, ""


def _verify_linear_kneser(instance, claim):
    A, B = instance["A"], instance["B"]
    ctx = A.ctx
    AB = product_span(A, B)
    if AB != parse_subspace(ctx, claim["AB"]):
        return False, "AB is not the product span"
    H = stabilizer_subfield(AB)
    if H.d != claim["H_degree"] or H.space != parse_subspace(ctx, claim["H"]):
        return False, "H is not the stabilizer subfield of AB"
    slack = AB.dim - A.dim - B.dim + H.d
    if slack != claim["slack"]:
        return False, f"recomputed slack {slack} != {claim['slack']}"
    if linear_kneser_verify(A, B).slack != slack:
        return False, "slack disagrees with linear Kneser"
    return True, ""


def _verify_basis_matching(instance, claim):
    A, B, a_basis = instance["A"], instance["B"], instance["a_basis"]
    ctx = A.ctx
    b_basis = BasisSeq(ctx, tuple(ctx.element(v) for v in claim["b_basis"]))
    if a_basis.span() != A:
        return False, "a_basis does not span A"
    if b_basis.span() != B:
        return False, "b_basis does not span B"
    failure = matched_basis_failure(a_basis, b_basis, A)
    if failure:
        return False, failure
    return True, ""


def _verify_criterion_violator(instance, claim):
    A, B, a_basis = instance["A"], instance["B"], instance["a_basis"]
    J = tuple(int(j) for j in claim["J"])
    n = len(a_basis)
    if not J or any(j < 1 or j > n for j in J) or len(set(J)) != len(J):
        return False, f"J={list(J)} is not a nonempty subset of 1..{n}"
    if a_basis.span() != A:
        return False, "a_basis does not span A"
    witness = criterion_witness(a_basis, B, A, J)
    if witness != parse_subspace(A.ctx, claim["witness_space"]):
        return False, "witness space does not match the recomputed intersection"
    deficit = witness.dim - (n - len(J))
    if deficit != claim["deficit"] or deficit <= 0:
        return False, f"recomputed deficit {deficit} != {claim['deficit']}"
    return True, ""


def _verify_finding(instance, claim, oracle_limit=None):
    subkind = claim.get("subkind")
    if subkind == "group_counterexample":
        A, B = instance["A"], instance["B"]
        if isinstance(find_matching(A, B), Matching):
            return False, "pair is matched"
        limit = BUDGETS["bijection_oracle_limit"] if oracle_limit is None else oracle_limit
        if len(A) <= limit and brute_force_matching(A, B, limit) is not None:
            return False, "bijection oracle finds a matching"
        return True, ""
    if subkind == "linear_counterexample":
        A, B, a_basis = instance["A"], instance["B"], instance["a_basis"]
        if basis_matchable(a_basis, B, A) is None:
            return False, "basis satisfies the criterion"
        if "locally_matched" in claim and bool(linear_locally_matched(A, B)) != claim["locally_matched"]:
            return False, "local matchedness flag disagrees"
        return True, ""
    if subkind == "strong_not_local":
        A, B = instance["A"], instance["B"]
        if not strong_matching_exists(A, B):
            return False, "no strong matching"
        if linear_locally_matched(A, B):
            return False, "pair is locally matched"
        return True, ""
    if subkind == "kneser_tight":
        ok, detail = _verify_kneser(instance, claim)
        if ok and (claim["slack"] != 0 or len(claim["H"]) < 2):
            return False, "not a tight pair with nontrivial stabilizer"
        return ok, detail
    return False, f"Unknown finding '{subkind}'"


def _verify_failure(instance, claim):
    # Imported here: campaigns depends on this module
    from matchlab.campaigns import reproduce_failure

    return reproduce_failure(claim["target"], instance, seed=int(claim.get("seed", 0)))


_VERIFIERS = {
    "matching": _verify_matching,
    "hall_violator": _verify_hall_violator,
    "local_matching": _verify_local_matching,
    "kneser": _verify_kneser,
    "linear_kneser": _verify_linear_kneser,
    "basis_matching": _verify_basis_matching,
    "criterion_violator": _verify_criterion_violator,
    "finding": _verify_finding,
    "failure": _verify_failure,
}


def verify_payload(payload, oracle_limit: int = None) -> VerifyResult:
    """Mathematics first, then the digest"""
    if not isinstance(payload, dict):
        return VerifyResult(False, None, "certificate is not a JSON object")
    kind = payload.get("kind")
    if kind not in _VERIFIERS:
        return VerifyResult(False, None, f"unknown kind {kind!r}")
    if payload.get("schema_version") != SCHEMA_VERSION:
        return VerifyResult(False, kind, f"stale schema version {payload.get('schema_version')!r}")
    if set(payload) != {"kind", "schema_version", "instance", "claim", "digest"}:
        return VerifyResult(False, kind, "unexpected certificate fields")
    if not isinstance(payload["claim"], dict):
        return VerifyResult(False, kind, "claim is not an object")

    try:
        # failure instances are parsed by the campaign target they belong to
        instance = payload["instance"] if kind == "failure" else parse_instance(payload["instance"])
        verifier = _VERIFIERS[kind]
        if kind == "finding":
            verifier = functools.partial(_verify_finding, oracle_limit=oracle_limit)
        ok, detail = verifier(instance, payload["claim"])
    except (MatchlabError, AttributeError, IndexError, KeyError, TypeError, ValueError) as e:
        return VerifyResult(False, kind, f"{type(e).__name__}: {e}")
    if not ok:
        return VerifyResult(False, kind, detail)

    if payload.get("digest") != digest_of(payload):
        return VerifyResult(False, kind, "digest mismatch")
    return VerifyResult(True, kind)


def certificate_verify(path, oracle_limit: int = None) -> VerifyResult:
    """
    Re-check a certificate file.

    Raises:
        SchemaError: the file is missing or not JSON
    """
    payload = load_json(path)
    result = verify_payload(payload, oracle_limit)
    if result:
        logger.debug("Certificate %s verified (%s)", path, result.kind)
    else:
        logger.warning("Certificate %s rejected: %s", path, result.detail)
    return result


# =============================================================================
# STORE
# =============================================================================

def certificate_filename(payload: dict) -> str:
    return f"{payload['kind']}-{payload['digest'][:16]}.json"


class CertificateStore:
    """Append-only directory of certificates, one file each, content-addressed"""

    def __init__(self, directory):
        self.directory = Path(directory)

    def write(self, payload: dict) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / certificate_filename(payload)
        text = pretty_json(payload) + "\n"
        if path.exists():
            if path.read_text(encoding="utf-8") != text:
                raise SchemaError(f"{path} exists with different content")
            return path
        path.write_text(text, encoding="utf-8")
        logger.debug("Wrote %s", path)
        return path

    def paths(self) -> list:
        if not self.directory.exists():
            return []
        return sorted(self.directory.glob("*.json"))


# =============================================================================
# TAMPERING
# =============================================================================

def _leaves(node, path=()):
    if isinstance(node, dict):
        for key in sorted(node):
            yield from _leaves(node[key], path + (key,))
    elif isinstance(node, list):
        if not node:
            yield path, node
        for i, item in enumerate(node):
            yield from _leaves(item, path + (i,))
    else:
        yield path, node


def _set_leaf(node, path, value):
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value


def _mutated(path, value, rng):
    if path == ("kind",):
        others = [k for k in CERTIFICATE_KINDS if k != value]
        return others[int(rng.integers(len(others)))]
    if path == ("digest",):
        i = int(rng.integers(len(value)))
        return value[:i] + ("0" if value[i] != "0" else "1") + value[i + 1:]
    if isinstance(value, bool):
        return not value
    if isinstance(value, int):
        return value + int(rng.integers(1, 4))
    if isinstance(value, str):
        return value + "!"
    if isinstance(value, list):
        return [0]
    return None


def leaf_count(payload: dict) -> int:
    return sum(1 for _ in _leaves(payload))


def mutate_certificate(payload: dict, rng, leaf: int = None) -> dict:
    """Copy of the certificate with exactly one leaf value changed (a random leaf unless given)"""
    mutated = copy.deepcopy(payload)
    leaves = list(_leaves(mutated))
    if leaf is None:
        leaf = int(rng.integers(len(leaves)))
    path, value = leaves[leaf]
    _set_leaf(mutated, path, _mutated(path, value, rng))
    return mutated
