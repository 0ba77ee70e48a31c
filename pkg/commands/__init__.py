"""
Command helpers shared by the matchlab subcommands
"""
import json

from matchlab.certificates import CertificateStore
from matchlab.errors import ConfigError
from matchlab.schemas import instance_io, pretty_json


def add_instance_argument(parser):
    parser.add_argument("--instance", required=True, metavar="FILE",
                        help="instance JSON file, or - for stdin")


def add_out_argument(parser):
    parser.add_argument("--out", metavar="DIR", help="also write certificates into this directory")


def load_instance(args) -> dict:
    return instance_io("parse", args.instance)


def require(instance: dict, *keys):
    missing = [k for k in keys if k not in instance]
    if missing:
        raise ConfigError(f"instance is missing {', '.join(missing)}")
    return [instance[k] for k in keys]


def print_json(args, payload):
    """Stdout carries only JSON; --quiet suppresses it"""
    if not args.quiet:
        print(pretty_json(payload))


def store_certificates(args, payloads) -> list:
    if not getattr(args, "out", None):
        return []
    store = CertificateStore(args.out)
    return [str(store.write(payload)) for payload in payloads]


def parse_bounds(text) -> dict:
    if not text:
        return {}
    try:
        bounds = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"--bounds is not JSON: {e}")
    if not isinstance(bounds, dict):
        raise ConfigError("--bounds must be a JSON object")
    return bounds
