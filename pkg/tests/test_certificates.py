# tests/test_certificates.py
import copy
import json

import numpy as np
import pytest

from matchlab import certificates
from matchlab.abelian import make_group, make_subset, subgroup_closure
from matchlab.certificates import (
    CertificateStore, _leaves, basis_matching_certificate, certificate_filename, certificate_verify,
    criterion_violator_certificate, digest_of, failure_certificate, finding_certificate,
    hall_violator_certificate, kneser_certificate, leaf_count, linear_kneser_certificate,
    local_matching_certificate, make_certificate, matching_certificate, mutate_certificate,
    verify_payload,
)
from matchlab.config import BUDGETS
from matchlab.errors import SchemaError
from matchlab.ffext import linear_kneser_verify, subfield
from matchlab.linear_matching import (
    BasisSeq, basis_matchable, construct_linear_counterexample, find_matched_basis,
)
from matchlab.matching import find_local_matching, find_matching, kneser_verify
from matchlab.schemas import emit_instance


# ---------------------------------------------------------
# Utility helpers
# ---------------------------------------------------------
def resealed(payload, **changes):
    """Apply changes and recompute the digest, so only the mathematics can fail"""
    changed = {**payload, **changes}
    changed["digest"] = digest_of(changed)
    return changed


@pytest.fixture
def z8_matching_cert(z8_pair):
    return matching_certificate(find_matching(*z8_pair))


# ---------------------------------------------------------
# Envelope
# ---------------------------------------------------------
def test_envelope_fields(z8_matching_cert):
    assert set(z8_matching_cert) == {"kind", "schema_version", "instance", "claim", "digest"}
    assert z8_matching_cert["schema_version"] == 1
    assert len(z8_matching_cert["digest"]) == 64
    assert certificate_filename(z8_matching_cert) == f"matching-{z8_matching_cert['digest'][:16]}.json"


def test_unknown_kind_rejected():
    with pytest.raises(SchemaError):
        make_certificate("proof", {}, {})
    assert not verify_payload({"kind": "proof"})
    assert not verify_payload([1, 2])


def test_digest_mismatch(z8_matching_cert):
    tampered = {**z8_matching_cert, "digest": "0" * 64}
    result = verify_payload(tampered)
    assert not result
    assert result.detail == "digest mismatch"


def test_stale_schema_version(z8_matching_cert):
    result = verify_payload(resealed(z8_matching_cert, schema_version=0))
    assert not result
    assert "schema version" in result.detail


# ---------------------------------------------------------
# Group certificates
# ---------------------------------------------------------
def test_matching_certificate_verifies(z8_matching_cert):
    result = verify_payload(z8_matching_cert)
    assert result.ok
    assert result.kind == "matching"


def test_tampered_matching_names_the_sum(z8_pair):
    A, B = z8_pair
    instance = {"group": A.group, "A": A, "B": B}
    cert = make_certificate("matching", instance, {"pairs": [[0, 1], [2, 3], [6, 4]]})
    result = verify_payload(cert)
    assert not result
    assert result.detail == "6+4=2∈A"


def test_hall_violator_certificate(z4_counterexample):
    cert = hall_violator_certificate(find_matching(*z4_counterexample))
    assert verify_payload(cert)
    claim = {**cert["claim"], "U": [1]}
    assert not verify_payload(resealed(cert, claim=claim))


def test_local_matching_certificate(z8, z8_pair):
    A, B = z8_pair
    local = find_local_matching(A, B, subgroup_closure(z8, [4]))
    cert = local_matching_certificate(A, B, local)
    assert verify_payload(cert)
    claim = {**cert["claim"], "witness": 0}
    result = verify_payload(resealed(cert, claim=claim))
    assert not result
    assert "⊄ A" in result.detail


def test_kneser_certificate():
    G = make_group(0, [12])
    cert = kneser_certificate(kneser_verify(make_subset(G, [0, 4, 8]), make_subset(G, [1, 5, 9])))
    assert verify_payload(cert)
    assert cert["claim"]["slack"] == 0
    claim = {**cert["claim"], "slack": 1}
    assert not verify_payload(resealed(cert, claim=claim))


def test_group_counterexample_finding(z4, z4_counterexample, z8_pair):
    A, B = z4_counterexample
    assert verify_payload(finding_certificate("group_counterexample", {"group": z4, "A": A, "B": B}))
    A, B = z8_pair
    result = verify_payload(finding_certificate("group_counterexample", {"group": A.group, "A": A, "B": B}))
    assert not result
    assert result.detail == "pair is matched"


def test_group_counterexample_uses_the_configured_oracle_limit(monkeypatch, z4, z4_counterexample):
    calls = []

    def oracle(A, B, limit=None):
        calls.append(limit)
        return None

    monkeypatch.setattr(certificates, "brute_force_matching", oracle)
    A, B = z4_counterexample
    cert = finding_certificate("group_counterexample", {"group": z4, "A": A, "B": B})

    assert verify_payload(cert, oracle_limit=len(A) - 1)
    assert calls == []
    assert verify_payload(cert, oracle_limit=len(A))
    assert calls == [len(A)]

    monkeypatch.setitem(BUDGETS, "bijection_oracle_limit", len(A) - 1)
    assert verify_payload(cert)
    assert calls == [len(A)]


def test_kneser_tight_finding():
    G = make_group(0, [12])
    cert = kneser_verify(make_subset(G, [0, 4, 8]), make_subset(G, [1, 5, 9]))
    claim = kneser_certificate(cert)["claim"]
    instance = {"group": G, "A": cert.A, "B": cert.B}
    assert verify_payload(finding_certificate("kneser_tight", instance, **claim))


# ---------------------------------------------------------
# Linear certificates
# ---------------------------------------------------------
def test_basis_matching_certificate(f4, f4_lines):
    one, omega = f4_lines
    cert = basis_matching_certificate(find_matched_basis([[1, 0]], omega, one), omega)
    assert verify_payload(cert)
    claim = {"b_basis": [[1, 0]]}
    assert not verify_payload(resealed(cert, claim=claim))


def test_criterion_violator_certificate(f16):
    A, B = construct_linear_counterexample(f16)
    basis = BasisSeq(f16, A.basis)
    cert = criterion_violator_certificate(basis_matchable(basis, B, A), B, A)
    assert verify_payload(cert)
    claim = {**cert["claim"], "deficit": cert["claim"]["deficit"] + 1}
    assert not verify_payload(resealed(cert, claim=claim))


def test_linear_kneser_certificate(f16):
    F4 = subfield(f16, 2).space
    cert = linear_kneser_certificate(linear_kneser_verify(F4, F4))
    assert verify_payload(cert)
    assert cert["claim"]["H_degree"] == 2


def test_linear_counterexample_finding(f16):
    A, B = construct_linear_counterexample(f16)
    instance = {"field": f16, "A": A, "B": B, "a_basis": BasisSeq(f16, A.basis)}
    assert verify_payload(finding_certificate("linear_counterexample", instance, locally_matched=False))
    assert not verify_payload(finding_certificate("linear_counterexample", instance, locally_matched=True))


# ---------------------------------------------------------
# Failure certificates
# ---------------------------------------------------------
def test_failure_that_reproduces(z4):
    # a matched pair in a group without the matching property is a failure of that target
    instance = emit_instance({"group": z4, "A": make_subset(z4, [1]), "B": make_subset(z4, [1])})
    cert = failure_certificate("thm35", instance, "constructed counterexample in Z/4 is matched")
    assert verify_payload(cert)


def test_failure_that_does_not_reproduce(z8_pair):
    A, B = z8_pair
    instance = emit_instance({"group": A.group, "A": A, "B": B})
    result = verify_payload(failure_certificate("thm31", instance, "locally matched but not matched"))
    assert not result
    assert result.detail == "failure does not reproduce"


# ---------------------------------------------------------
# Store and files
# ---------------------------------------------------------
def test_store_is_content_addressed(tmp_path, z8_matching_cert):
    store = CertificateStore(tmp_path / "certs")
    assert store.paths() == []
    path = store.write(z8_matching_cert)
    assert store.write(z8_matching_cert) == path
    assert store.paths() == [path]
    assert json.loads(path.read_text(encoding="utf-8")) == z8_matching_cert
    assert certificate_verify(path)


def test_store_refuses_conflicting_content(tmp_path, z8_matching_cert):
    store = CertificateStore(tmp_path)
    path = store.write(z8_matching_cert)
    path.write_text("{}", encoding="utf-8")
    with pytest.raises(SchemaError):
        store.write(z8_matching_cert)


def test_certificate_verify_missing_file(tmp_path):
    with pytest.raises(SchemaError):
        certificate_verify(tmp_path / "nothing.json")


# ---------------------------------------------------------
# Tampering
# ---------------------------------------------------------
@pytest.mark.parametrize("leaf", [0, 3, 7])
def test_mutation_changes_exactly_one_leaf(z8_matching_cert, leaf):
    original = copy.deepcopy(z8_matching_cert)
    mutated = mutate_certificate(z8_matching_cert, np.random.default_rng(5), leaf=leaf)
    assert z8_matching_cert == original
    before, after = list(_leaves(original)), list(_leaves(mutated))
    assert len(before) == len(after)
    changed = [i for i, (old, new) in enumerate(zip(before, after)) if old != new]
    assert changed == [leaf]


def test_every_single_leaf_mutation_is_rejected(z8_matching_cert):
    for leaf in range(leaf_count(z8_matching_cert)):
        mutated = mutate_certificate(z8_matching_cert, np.random.default_rng([0, leaf]), leaf=leaf)
        assert not verify_payload(mutated), leaf
