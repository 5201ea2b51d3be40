"""Command-line entry point: ``paulitomo {tomo,overlap,lowerbound,oracle,report}``."""
from __future__ import annotations

import argparse
import sys

from . import harness


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override its entries")
    p.add_argument("--state", help="maximally_mixed | basis:BITS | ghz | random_pure:SEED | random_mixed[:RANK]:SEED")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--m", type=int, help="shots per basis (tomo) or samples per column (lowerbound)")
    p.add_argument("--total-shots", type=int)
    p.add_argument("--subsets", help="e.g. '0-1;2-3'")
    p.add_argument("--bases", help="comma-separated bases for the oracle report")
    p.add_argument("--n-list", help="comma-separated n values for the lower-bound scaling table")
    p.add_argument("--workers", type=int)
    p.add_argument("--project-to-physical", action="store_const", const="true")
    p.add_argument("--save-shots", action="store_const", const="true")
    p.add_argument("--save-estimates", action="store_const", const="true")
    p.add_argument("--include-smaller", action="store_const", const="true")


_KEYS = (
    "state n k epsilon delta trials seed out m total_shots subsets bases n_list workers "
    "project_to_physical save_shots save_estimates include_smaller"
).split()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paulitomo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in harness.KINDS:
        _add_config_flags(sub.add_parser(kind, help=f"run a {kind} experiment"))
    rep = sub.add_parser("report", help="re-aggregate a saved trials.jsonl")
    rep.add_argument("trials_file")
    rep.add_argument("--out", help="summary CSV path (default: print to stdout)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            rows = harness.report(args.trials_file, args.out)
            if args.out is None:
                for row in rows:
                    print(",".join(str(row[k]) for k in harness.SUMMARY_FIELDS))
            return 0
        items = harness.parse_config_text(open(args.config).read()) if args.config else {}
        items.update({k: str(getattr(args, k)) for k in _KEYS if getattr(args, k) is not None})
        items["kind"] = args.command
        config = harness.ExperimentConfig.from_items(items)
        result = harness.run_experiment(config)
    except (ValueError, OSError) as err:
        print(f"paulitomo: error: {err}", file=sys.stderr)
        return 2
    if result.summary:
        s = result.metric("success")
        print(f"{config.kind}: {s['count']} trials, success rate {s['mean']:.4f} "
              f"(95% Wilson [{s['wilson_low']:.4f}, {s['wilson_high']:.4f}]) -> {config.out}")
    elif "scaling" in result.extra:
        for row in result.extra["scaling"]:
            print(f"n={row['n']:3d}  m*={row['m_star']}")
    else:
        print(f"{config.kind}: wrote {config.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
