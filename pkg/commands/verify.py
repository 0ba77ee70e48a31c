"""
verify subcommands
Kneser inequality in a group, linear Kneser inequality in a field
"""
from commands import (
    add_instance_argument, add_out_argument, load_instance, print_json, require,
    store_certificates,
)
from matchlab.certificates import kneser_certificate, linear_kneser_certificate
from matchlab.ffext import linear_kneser_verify
from matchlab.matching import kneser_verify


def register(subparsers):
    parser = subparsers.add_parser("verify", help="Kneser-type inequalities")
    actions = parser.add_subparsers(dest="action", required=True)

    p = actions.add_parser("kneser", help="#(A+B) >= #A + #B - #H")
    add_instance_argument(p)
    add_out_argument(p)
    p.set_defaults(handler=kneser_command)

    p = actions.add_parser("linear-kneser", help="dim⟨AB⟩ >= dim A + dim B - dim H")
    add_instance_argument(p)
    add_out_argument(p)
    p.set_defaults(handler=linear_kneser_command)


def kneser_command(args, settings) -> int:
    A, B = require(load_instance(args), "A", "B")
    certificate = kneser_certificate(kneser_verify(A, B))
    store_certificates(args, [certificate])
    print_json(args, certificate)
    return 0


def linear_kneser_command(args, settings) -> int:
    A, B = require(load_instance(args), "A", "B")
    certificate = linear_kneser_certificate(linear_kneser_verify(A, B))
    store_certificates(args, [certificate])
    print_json(args, certificate)
    return 0
