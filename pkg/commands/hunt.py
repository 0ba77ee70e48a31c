"""
hunt subcommand
Search for unmatched pairs in groups or in finite fields
"""
from commands import parse_bounds, print_json, store_certificates
from matchlab.campaigns import hunt_counterexample
from matchlab.schemas import emit_instance


def register(subparsers):
    parser = subparsers.add_parser("hunt", help="search for unmatched pairs")
    parser.add_argument("domain", choices=["group", "linear"])
    parser.add_argument("--bounds", metavar="JSON",
                        help='e.g. \'{"groups": [[4]], "max_size": 2}\' or \'{"fields": [[2, 4]], "max_dim": 2}\'')
    parser.add_argument("--out", metavar="DIR", help="also write finding certificates into this directory")
    parser.set_defaults(handler=hunt_command)


def hunt_command(args, settings) -> int:
    findings = hunt_counterexample(args.domain, parse_bounds(args.bounds), settings)
    store_certificates(args, [f.certificate for f in findings])
    print_json(args, [
        {
            "source": f.source,
            "instance": emit_instance(f.instance),
            "locally_matched": f.locally_matched,
            "digest": f.certificate["digest"],
        }
        for f in findings
    ])
    return 0
