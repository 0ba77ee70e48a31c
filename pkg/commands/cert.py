"""
cert subcommands
verify certificate files, normalize instance JSON
"""
from pathlib import Path

from commands import print_json
from matchlab.certificates import CertificateStore, certificate_verify
from matchlab.errors import SchemaError, VerificationFailure
from matchlab.schemas import instance_io, load_json


def register(subparsers):
    parser = subparsers.add_parser("cert", help="certificates and instance JSON")
    actions = parser.add_subparsers(dest="action", required=True)

    p = actions.add_parser("verify", help="re-check certificates from their embedded instances")
    p.add_argument("paths", nargs="+", metavar="PATH", help="certificate files or store directories")
    p.set_defaults(handler=verify_command)

    p = actions.add_parser("normalize", help="parse an instance and print its canonical JSON")
    p.add_argument("--instance", required=True, metavar="FILE", help="instance JSON file, or - for stdin")
    p.set_defaults(handler=normalize_command)


def certificate_paths(paths) -> list:
    """Files as given; a directory stands for every certificate stored in it"""
    expanded = []
    for path in paths:
        if Path(path).is_dir():
            stored = CertificateStore(path).paths()
            if not stored:
                raise SchemaError(f"No certificates in {path}")
            expanded.extend(str(p) for p in stored)
        else:
            expanded.append(str(path))
    return expanded


def verify_command(args, settings) -> int:
    results = []
    for path in certificate_paths(args.paths):
        result = certificate_verify(path, settings.bijection_oracle_limit)
        results.append({"path": path, "ok": result.ok, "kind": result.kind, "detail": result.detail})
    print_json(args, results)

    rejected = [r for r in results if not r["ok"]]
    if rejected:
        raise VerificationFailure(f"{len(rejected)} of {len(results)} certificates rejected: "
                                  f"{rejected[0]['path']}: {rejected[0]['detail']}")
    return 0


def normalize_command(args, settings) -> int:
    canonical = instance_io("emit", instance_io("parse", load_json(args.instance)))
    if not args.quiet:
        print(canonical)
    return 0
