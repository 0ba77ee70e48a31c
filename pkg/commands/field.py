"""
field subcommands
find-matched-basis, check-matched, check-primitive, check-strong, check-local
"""
import logging

from commands import (
    add_instance_argument, add_out_argument, load_instance, print_json, require,
    store_certificates,
)
from matchlab.certificates import basis_matching_certificate, criterion_violator_certificate
from matchlab.linear_matching import (
    BasisMatching, BasisSeq, find_matched_basis, is_matched, linear_locally_matched,
    primitive_check, strong_matching_exists,
)
from matchlab.schemas import emit_basis, emit_subspace

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("field", help="matchings between subspaces of F_{p^n}")
    actions = parser.add_subparsers(dest="action", required=True)

    p = actions.add_parser("find-matched-basis", help="matched basis of B for a basis of A")
    add_instance_argument(p)
    add_out_argument(p)
    p.add_argument("--canonical", action="store_true",
                   help="first matched basis in canonical order (exhaustive, budgeted)")
    p.set_defaults(handler=find_matched_basis_command)

    p = actions.add_parser("check-matched", help="every basis of A can be matched to B")
    add_instance_argument(p)
    add_out_argument(p)
    p.add_argument("--mode", choices=["exhaustive", "sample"], default="exhaustive")
    p.add_argument("--trials", type=int, default=None, help="sampled bases (default from settings)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=check_matched_command)

    p = actions.add_parser("check-primitive", help="B meets no proper subfield")
    add_instance_argument(p)
    p.set_defaults(handler=check_primitive_command)

    p = actions.add_parser("check-strong", help="⟨AB⟩ ∩ A = 0")
    add_instance_argument(p)
    p.set_defaults(handler=check_strong_command)

    p = actions.add_parser("check-local", help="local matchings for every qualifying subfield")
    add_instance_argument(p)
    p.add_argument("--rule", choices=["definition", "criterion"], default="definition")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=check_local_command)


def find_matched_basis_command(args, settings) -> int:
    instance = load_instance(args)
    A, B = require(instance, "A", "B")
    a_basis = instance.get("a_basis")
    if a_basis is None:
        a_basis = BasisSeq(A.ctx, A.basis)

    result = find_matched_basis(a_basis, B, A, canonical=args.canonical,
                                budget=settings.ordered_basis_budget)
    if isinstance(result, BasisMatching):
        certificate = basis_matching_certificate(result, B)
        logger.info("Matched basis found")
    else:
        certificate = criterion_violator_certificate(result, B, A)
        logger.info("Criterion fails at J=%s (deficit %s)", list(result.J), result.deficit)
    store_certificates(args, [certificate])
    print_json(args, certificate)
    return 0


def check_matched_command(args, settings) -> int:
    A, B = require(load_instance(args), "A", "B")
    trials = settings.basis_trials if args.trials is None else args.trials
    report = is_matched(A, B, mode=args.mode, trials=trials, seed=args.seed,
                        budget=settings.ordered_basis_budget)
    payload = {"matched": report.ok, "mode": report.mode, "examined": report.examined, "seed": report.seed}
    if not report.ok:
        certificate = criterion_violator_certificate(report.violator, B, A)
        store_certificates(args, [certificate])
        payload["failing_basis"] = emit_basis(report.failing_basis)
        payload["certificate"] = certificate
    print_json(args, payload)
    return 0


def check_primitive_command(args, settings) -> int:
    (B,) = require(load_instance(args), "B")
    report = primitive_check(B)
    payload = {"primitive": report.ok, "offender": None}
    if not report.ok:
        payload["offender"] = {"d": report.offender.d, "space": emit_subspace(report.offender.space)}
    print_json(args, payload)
    return 0


def check_strong_command(args, settings) -> int:
    A, B = require(load_instance(args), "A", "B")
    print_json(args, {"strong_matching": strong_matching_exists(A, B)})
    return 0


def check_local_command(args, settings) -> int:
    A, B = require(load_instance(args), "A", "B")
    report = linear_locally_matched(
        A, B, rule=args.rule,
        subspace_budget=settings.subspace_budget, subspace_trials=settings.subspace_trials,
        basis_budget=settings.ordered_basis_budget, basis_trials=settings.basis_trials,
        seed=args.seed,
    )
    subfields = [
        {
            "d": trace.H.d,
            "module": emit_subspace(trace.module),
            "intersection": emit_subspace(trace.intersection),
            "a_tilde": None if trace.a_tilde is None else emit_subspace(trace.a_tilde),
            "mode": trace.mode,
            "candidates": trace.candidates,
        }
        for trace in report.traces
    ]
    print_json(args, {"locally_matched": report.ok, "rule": args.rule, "subfields": subfields})
    return 0
