"""
campaign subcommands
run a theorem campaign, list the theorem ids
"""
import logging

from commands import parse_bounds, print_json
from matchlab.campaigns import make_campaign_config, run_campaign
from matchlab.config import THEOREM_CONFIG, get_theorem_ids

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("campaign", help="exhaustive or seeded-random theorem campaigns")
    actions = parser.add_subparsers(dest="action", required=True)

    p = actions.add_parser("run", help="run one campaign")
    p.add_argument("--theorem", required=True, metavar="ID", help=f"one of {', '.join(get_theorem_ids())}")
    p.add_argument("--mode", choices=["exhaustive", "random"], default="random")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", metavar="DIR", help="report and certificate directory")
    p.add_argument("--bounds", metavar="JSON", help='bound overrides, e.g. \'{"max_order": 6}\'')
    p.add_argument("--html", action="store_true", help="also write summary.html")
    p.set_defaults(handler=run_command)

    p = actions.add_parser("list", help="theorem ids with their default bounds")
    p.set_defaults(handler=list_command)


def run_command(args, settings) -> int:
    config = make_campaign_config(
        target=args.theorem,
        mode=args.mode,
        trials=args.trials,
        seed=args.seed,
        jobs=args.jobs,
        out=args.out,
        bounds=parse_bounds(args.bounds),
        html=args.html,
    )
    report = run_campaign(config, settings)
    print_json(args, report.to_dict())
    if not report.ok:
        logger.error("%s: %s failures", config.target, len(report.failures))
        return 2
    return 0


def list_command(args, settings) -> int:
    print_json(args, {
        target: {"domain": entry["domain"], "description": entry["description"], "bounds": entry["bounds"]}
        for target, entry in THEOREM_CONFIG.items()
    })
    return 0
