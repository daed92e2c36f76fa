"""Command-line entry point: ``advrobust <stage> ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError
from .pipeline import PipelineError, craft_suite, gen_data, run_all, train_zoo, transfer_eval
from .report import FORMATS, write_report


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _threads(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("--threads must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=argparse.SUPPRESS,
                        help="master seed (overrides the config file)")
    common.add_argument("--threads", type=_threads, default=argparse.SUPPRESS,
                        help="worker threads; results do not depend on it")
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="advrobust", parents=[common],
                                description="Adversarial robustness benchmark pipeline.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-data", parents=[common], help="generate synthetic datasets")
    s.add_argument("--spec", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("train", parents=[common], help="train the model zoo")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--data", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("craft", parents=[common], help="craft adversarial examples")
    s.add_argument("--zoo", required=True, type=Path)
    s.add_argument("--attacks", default=None,
                   help="comma-separated subset, e.g. fgsm,dag-a (default: all configured)")
    s.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("evaluate", parents=[common], help="black-box transfer evaluation")
    s.add_argument("--zoo", required=True, type=Path)
    s.add_argument("--crafted", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)

    s = sub.add_parser("report", parents=[common], help="render an evaluation summary")
    s.add_argument("--in", dest="in_dir", required=True, type=Path)
    s.add_argument("--format", choices=FORMATS, default="md")

    s = sub.add_parser("run", parents=[common], help="all stages in sequence")
    s.add_argument("--config", required=True, type=Path)
    s.add_argument("--spec", required=True, type=Path)
    s.add_argument("--out", required=True, type=Path)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    seed = getattr(args, "seed", None)
    threads = getattr(args, "threads", None)
    try:
        if args.command == "gen-data":
            gen_data(args.spec.read_text(), args.out, seed=seed)
        elif args.command == "train":
            train_zoo(args.config, args.data, args.out, seed=seed, threads=threads)
        elif args.command == "craft":
            attacks = [a.strip() for a in args.attacks.split(",") if a.strip()] if args.attacks else None
            craft_suite(args.zoo, args.out, attacks=attacks, seed=seed, threads=threads)
        elif args.command == "evaluate":
            transfer_eval(args.zoo, args.crafted, args.out, seed=seed, threads=threads)
        elif args.command == "report":
            for path in write_report(args.in_dir, args.format):
                print(path)
        elif args.command == "run":
            run_all(args.config, args.spec, args.out, seed=seed, threads=threads)
            for fmt in FORMATS:
                write_report(args.out / "eval", fmt)
    except (ConfigError, PipelineError, FileNotFoundError) as e:
        print(f"advrobust: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
