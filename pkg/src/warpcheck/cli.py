"""``warpcheck verify``: run the sampling verifier from a config file."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import CASES, ConfigError, load_config
from .verify import render, run_suite


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="warpcheck", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", help="compare closed forms with first-principles oracles")
    v.add_argument("--config", required=True,
                   help="JSON config path, or a built-in name (CFG-A, CFG-B, CFG-C, CFG-SWAP, CFG-POLY)")
    v.add_argument("--case", default=None, choices=CASES + ("all",), help="case to run (default: the config's cases)")
    v.add_argument("--samples", type=int, default=None, help="sample points per case (default 100)")
    v.add_argument("--seed", type=int, default=None, help="sampling seed (default 42)")
    v.add_argument("--tol", type=float, default=None, help="relative tolerance (default 1e-6)")
    v.add_argument("--jet-order", type=int, default=None, choices=range(0, 5), metavar="{0..4}",
                   help="jet order for the oracles (default 4)")
    v.add_argument("--printed-forms", action="store_true",
                   help="start from the printed formulas and walk the correction catalog")
    v.add_argument("--report", type=Path, default=None, help="write the report here instead of stdout")
    v.add_argument("--format", choices=("json", "csv", "text"), default="json")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.samples is not None and args.samples < 1:
            raise ConfigError("--samples", "must be at least 1")
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol", "must be positive")
        cfg = cfg.with_overrides(cases=args.case, samples=args.samples, seed=args.seed, jet_order=args.jet_order,
                                 rel_tol=args.tol)
    except ConfigError as exc:
        print(f"warpcheck: config error: {exc}", file=sys.stderr)
        return 2
    result = run_suite(cfg, printed_forms=args.printed_forms)
    text = render(result, args.format)
    if args.report is None:
        sys.stdout.write(text)
    else:
        args.report.write_text(text, encoding="utf-8")
        print(render(result, "text") if args.format != "text" else text, end="", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
