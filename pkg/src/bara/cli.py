"""Command line entry point: ``bara {run,batch,oracle,plotdata}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .harness import BatchResult, RunConfig, batch, compute_oracle, run, write_outputs
from .plotting import write_plotdata


def _load(args) -> RunConfig:
    cfg = RunConfig.from_json(args.config) if args.config else RunConfig()
    if args.policy:
        cfg = replace(cfg, policy=args.policy, policies=[args.policy])
    if args.seed:
        cfg = replace(cfg, seeds=list(args.seed))
    return cfg


def _out_dir(args, cfg):
    return args.out or cfg.output


def _say(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def cmd_run(args) -> int:
    cfg = _load(args)
    seed = cfg.seeds[0]
    oracle = compute_oracle(cfg, seed)
    res = run(cfg, seed, oracle)
    out = _out_dir(args, cfg)
    if out:
        write_outputs(BatchResult([res], [], {seed: oracle}), out)
    _say(
        args,
        f"{res.run_id}: final_accuracy={res.final_accuracy:.4f} "
        f"rounds={res.rounds_executed} spend={res.total_spend:.2f}",
    )
    return 0


def _print_aggregate(args, result) -> None:
    for row in result.aggregate():
        _say(
            args,
            f"{row['policy']:>5}  runs={row['runs']:<3} failures={row['failures']:<2} "
            f"mean={row['mean_final_accuracy']:.4f} std={row['std_final_accuracy']:.4f}",
        )


def cmd_batch(args) -> int:
    cfg = _load(args)
    result = batch(cfg, out_dir=_out_dir(args, cfg), workers=args.workers)
    _print_aggregate(args, result)
    return 1 if result.failures else 0


def cmd_oracle(args) -> int:
    cfg = _load(args)
    rows = []
    for seed in cfg.seeds:
        n, a = compute_oracle(cfg, seed)
        rows.append({"seed": seed, "arm": n, "final_accuracy": a})
        _say(args, f"seed {seed}: best_arm={n} accuracy={a:.6f}")
    out = _out_dir(args, cfg)
    if out:
        Path(out).mkdir(parents=True, exist_ok=True)
        with open(Path(out) / "oracle.json", "w") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")
    return 0


def cmd_plotdata(args) -> int:
    cfg = _load(args)
    out = _out_dir(args, cfg) or "plotdata"
    result = batch(cfg, out_dir=out, workers=args.workers)
    paths = write_plotdata(result, out, figures=not args.no_figures)
    _print_aggregate(args, result)
    for p in paths:
        _say(args, f"wrote {p}")
    return 1 if result.failures else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (RunConfig fields)")
    common.add_argument("--seed", type=int, action="append", help="seed; repeat to list several")
    common.add_argument("--out", help="output directory")
    common.add_argument("--policy", choices=["EA", "MIA", "MDA", "RA", "BARA"], help="override the policy")
    common.add_argument("--quiet", action="store_true", help="no progress output")

    parser = argparse.ArgumentParser(prog="bara", description="Budget-aware participant-count simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="one policy, one seed").set_defaults(func=cmd_run)
    p = sub.add_parser("batch", parents=[common], help="every policy over every seed")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_batch)
    sub.add_parser("oracle", parents=[common], help="best fixed participant count").set_defaults(func=cmd_oracle)
    p = sub.add_parser("plotdata", parents=[common], help="batch plus per-figure CSVs and images")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-figures", action="store_true", help="CSV tables only")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
