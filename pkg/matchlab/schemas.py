"""
JSON Schemas and Canonical Encoding
Parsing of instance payloads into domain objects and canonical emission back to JSON
"""
import json
import sys
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from matchlab.abelian import GroupElement, GroupSpec, GroupSubset, Subgroup, make_group, make_subset
from matchlab.errors import MatchlabError, SchemaError
from matchlab.ffext import FieldCtx, FqElement, Subspace, make_field, subspace_from_vectors
from matchlab.linear_matching import BasisSeq, make_basis


# =============================================================================
# PAYLOAD MODELS
# =============================================================================

class ElementModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    free: list[int] = []
    torsion: list[int] = []


# int shorthand for one-component groups, flat list of r + k components, or the full form
ElementPayload = Union[int, list[int], ElementModel]


class GroupModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    free_rank: int = Field(0, ge=0)
    torsion: list[int] = []

    @field_validator("torsion")
    @classmethod
    def orders_at_least_two(cls, v):
        for n in v:
            if n < 2:
                raise ValueError(f"torsion order must be >= 2, got {n}")
        return v


class FieldModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    p: int = Field(ge=2)
    n: int = Field(ge=1)
    modulus: Optional[list[int]] = None


class GroupInstanceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    group: GroupModel
    A: Optional[list[ElementPayload]] = None
    B: Optional[list[ElementPayload]] = None
    pairs: Optional[list[tuple[ElementPayload, ElementPayload]]] = None
    H: Optional[list[ElementPayload]] = None


class LinearInstanceModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    field: FieldModel
    A: Optional[list[list[int]]] = None
    B: Optional[list[list[int]]] = None
    a_basis: Optional[list[list[int]]] = None
    b_basis: Optional[list[list[int]]] = None


def _validate(model, payload):
    try:
        return model.model_validate(payload)
    except ValidationError as e:
        raise SchemaError(f"{model.__name__}: {e.error_count()} validation error(s)\n{e}")


# =============================================================================
# PARSE
# =============================================================================

def parse_group(payload) -> GroupSpec:
    """Group must already be in invariant-factor form so element components line up"""
    model = payload if isinstance(payload, GroupModel) else _validate(GroupModel, payload)
    group = make_group(model.free_rank, model.torsion)
    if list(group.torsion_orders) != model.torsion:
        raise SchemaError(
            f"torsion {model.torsion} is not in invariant-factor form",
            hint={"free_rank": group.free_rank, "torsion": list(group.torsion_orders)},
        )
    return group


def parse_element(group: GroupSpec, payload) -> GroupElement:
    if isinstance(payload, ElementModel):
        payload = payload.model_dump()
    try:
        return group.element(payload)
    except MatchlabError as e:
        raise SchemaError(str(e))


def parse_subset(group: GroupSpec, items) -> GroupSubset:
    elements = [parse_element(group, x) for x in items]
    if len(set(elements)) != len(elements):
        raise SchemaError("subset lists an element twice")
    return make_subset(group, elements)


def parse_field(payload) -> FieldCtx:
    model = payload if isinstance(payload, FieldModel) else _validate(FieldModel, payload)
    try:
        return make_field(model.p, model.n, model.modulus)
    except MatchlabError as e:
        raise SchemaError(str(e))


def parse_subspace(ctx: FieldCtx, rows) -> Subspace:
    """Rows must be the canonical reduced echelon basis; the hint carries it otherwise"""
    try:
        space = subspace_from_vectors(ctx, rows)
    except MatchlabError as e:
        raise SchemaError(str(e))
    given = [[int(c) for c in row] for row in rows]
    canonical = [list(row) for row in space.rows]
    if given != canonical:
        raise SchemaError("subspace rows are not in canonical reduced echelon form", hint=canonical)
    return space


def parse_basis(ctx: FieldCtx, vectors) -> BasisSeq:
    try:
        return make_basis(ctx, vectors)
    except MatchlabError as e:
        raise SchemaError(str(e))


def parse_instance(payload) -> dict:
    """
    Group or linear instance payload into domain objects.

    Returns:
        dict with "group" or "field" plus whichever of A, B, pairs, H,
        a_basis, b_basis were present
    """
    if not isinstance(payload, dict):
        raise SchemaError("instance must be a JSON object")

    if "group" in payload:
        model = _validate(GroupInstanceModel, payload)
        group = parse_group(model.group)
        instance = {"group": group}
        for key in ("A", "B", "H"):
            items = getattr(model, key)
            if items is not None:
                instance[key] = parse_subset(group, items)
        if model.pairs is not None:
            instance["pairs"] = tuple((parse_element(group, a), parse_element(group, b)) for a, b in model.pairs)
        return instance

    if "field" in payload:
        model = _validate(LinearInstanceModel, payload)
        ctx = parse_field(model.field)
        instance = {"field": ctx}
        for key in ("A", "B"):
            rows = getattr(model, key)
            if rows is not None:
                instance[key] = parse_subspace(ctx, rows)
        for key in ("a_basis", "b_basis"):
            vectors = getattr(model, key)
            if vectors is not None:
                instance[key] = parse_basis(ctx, vectors)
        return instance

    raise SchemaError("instance needs a 'group' or a 'field'")


# =============================================================================
# EMIT
# =============================================================================

def emit_group(group: GroupSpec) -> dict:
    return {"free_rank": group.free_rank, "torsion": list(group.torsion_orders)}


def emit_element(x) -> object:
    if isinstance(x, GroupElement):
        return {"free": list(x.free_part), "torsion": list(x.torsion_part)}
    if isinstance(x, FqElement):
        return list(x.coeffs)
    raise SchemaError(f"cannot encode {type(x).__name__}")


def emit_subset(subset) -> list:
    if isinstance(subset, Subgroup):
        subset = subset.elements
    return [emit_element(x) for x in sorted(subset)]


def emit_field(ctx: FieldCtx) -> dict:
    return {"p": ctx.p, "n": ctx.n, "modulus": list(ctx.modulus)}


def emit_subspace(space: Subspace) -> list:
    return [list(row) for row in space.rows]


def emit_basis(basis) -> list:
    return [list(v.coeffs) for v in basis]


def emit_pairs(pairs) -> list:
    return [[emit_element(a), emit_element(b)] for a, b in sorted(pairs)]


def emit_instance(instance: dict) -> dict:
    payload = {}
    if "group" in instance:
        payload["group"] = emit_group(instance["group"])
        for key in ("A", "B", "H"):
            if key in instance:
                payload[key] = emit_subset(instance[key])
        if "pairs" in instance:
            payload["pairs"] = emit_pairs(instance["pairs"])
    elif "field" in instance:
        payload["field"] = emit_field(instance["field"])
        for key in ("A", "B"):
            if key in instance:
                payload[key] = emit_subspace(instance[key])
        for key in ("a_basis", "b_basis"):
            if key in instance:
                payload[key] = emit_basis(instance[key])
    else:
        raise SchemaError("instance needs a 'group' or a 'field'")
    return payload


# =============================================================================
# JSON TEXT
# =============================================================================

def canonical_json(obj) -> str:
    """Sorted keys, no whitespace; the byte form that digests are taken over"""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def pretty_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False)


def load_json(source) -> object:
    """Read JSON from a path, '-' for stdin, or pass a dict through"""
    if isinstance(source, dict):
        return source
    try:
        if str(source) == "-":
            return json.load(sys.stdin)
        with open(Path(source), encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise SchemaError(f"File not found: {source}")
    except json.JSONDecodeError as e:
        raise SchemaError(f"Cannot parse JSON from {source}: {e}")


def instance_io(action: str, payload):
    """
    parse: JSON text, path or dict -> domain instance dict
    emit: domain instance dict -> canonical JSON text
    """
    if action == "parse":
        if isinstance(payload, str) and payload.lstrip().startswith("{"):
            try:
                payload = json.loads(payload)
            except json.JSONDecodeError as e:
                raise SchemaError(f"Cannot parse JSON: {e}")
        return parse_instance(load_json(payload))
    if action == "emit":
        return canonical_json(emit_instance(payload))
    raise SchemaError(f"Unknown instance action '{action}'")
