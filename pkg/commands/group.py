"""
group subcommands
find-matching, check-local, decide-property, counterexample
"""
import logging

from commands import (
    add_instance_argument, add_out_argument, load_instance, print_json, require,
    store_certificates,
)
from matchlab.certificates import (
    finding_certificate, local_matching_certificate, matching_result_certificate,
)
from matchlab.matching import (
    Matching, construct_counterexample, decide_matching_property, find_matching,
    is_locally_matched,
)
from matchlab.schemas import emit_element, emit_group, emit_subset

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("group", help="matchings in finite abelian groups")
    actions = parser.add_subparsers(dest="action", required=True)

    p = actions.add_parser("find-matching", help="matching from A to B, or a Hall violator")
    add_instance_argument(p)
    add_out_argument(p)
    p.set_defaults(handler=find_matching_command)

    p = actions.add_parser("check-local", help="local matchings for every qualifying subgroup")
    add_instance_argument(p)
    add_out_argument(p)
    p.set_defaults(handler=check_local_command)

    p = actions.add_parser("decide-property", help="does the group have the matching property")
    add_instance_argument(p)
    p.set_defaults(handler=decide_property_command)

    p = actions.add_parser("counterexample", help="unmatchable pair for a group without the property")
    add_instance_argument(p)
    add_out_argument(p)
    p.set_defaults(handler=counterexample_command)


def find_matching_command(args, settings) -> int:
    A, B = require(load_instance(args), "A", "B")
    result = find_matching(A, B)
    certificate = matching_result_certificate(result)
    store_certificates(args, [certificate])
    if isinstance(result, Matching):
        logger.info("Matching found (%s)", result.method)
    else:
        logger.info("No matching: Hall violator with #S=%s", len(result.S))
    print_json(args, certificate)
    return 0


def check_local_command(args, settings) -> int:
    A, B = require(load_instance(args), "A", "B")
    report = is_locally_matched(A, B)

    subgroups, certificates = [], []
    for trace in report.traces:
        entry = {
            "H": emit_subset(trace.H),
            "witness": emit_element(trace.witness),
            "intersection": emit_subset(trace.intersection),
            "local_matching": None,
        }
        if trace.local_matching is not None:
            certificate = local_matching_certificate(A, B, trace.local_matching)
            entry["local_matching"] = certificate
            certificates.append(certificate)
        subgroups.append(entry)

    store_certificates(args, certificates)
    print_json(args, {"locally_matched": report.ok, "subgroups": subgroups})
    return 0


def decide_property_command(args, settings) -> int:
    (group,) = require(load_instance(args), "group")
    print_json(args, {"group": emit_group(group), "matching_property": decide_matching_property(group)})
    return 0


def counterexample_command(args, settings) -> int:
    (group,) = require(load_instance(args), "group")
    pair = construct_counterexample(group, settings.bijection_oracle_limit)
    if pair is None:
        logger.info("%s has the matching property", group)
        print_json(args, {"group": emit_group(group), "counterexample": None})
        return 0
    A, B = pair
    certificate = finding_certificate("group_counterexample", {"group": group, "A": A, "B": B})
    store_certificates(args, [certificate])
    print_json(args, certificate)
    return 0
