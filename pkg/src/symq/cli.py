"""``symq`` command line: train, eval, compare, diagnose.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from . import gmm
from .config import AgentConfig, config_from_dict, load_config
from .correction import noise_histogram, read_errors_csv, write_summary_json
from .envs import make_env
from .errors import ConfigError, NumericalError
from .training import compare, evaluate, load_checkpoint, train

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _bool(text):
    lowered = str(text).lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _hidden(text):
    return [int(x) for x in str(text).split(",") if x]


def parse_seeds(text) -> list[int]:
    """``0..4`` (inclusive range) or a comma-separated list."""
    text = str(text).strip()
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(s) for s in text.split(",") if s]


def _add_config_flags(parser):
    """One flag per config field; unset flags leave the file/preset value alone."""
    for f in dataclasses.fields(AgentConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.name == "seed":
            continue
        if f.name == "paper_scale":
            parser.add_argument(flag, dest=f.name, action="store_const", const=True, default=None)
        elif f.name == "hidden":
            parser.add_argument(flag, dest=f.name, type=_hidden, default=None, help="comma-separated sizes")
        elif f.type in ("bool", bool):
            parser.add_argument(flag, dest=f.name, type=_bool, default=None)
        elif f.type in ("int", int):
            parser.add_argument(flag, dest=f.name, type=int, default=None)
        elif f.type in ("float", float):
            parser.add_argument(flag, dest=f.name, type=float, default=None)
        else:
            parser.add_argument(flag, dest=f.name, default=None)


def _overrides(args) -> dict:
    names = [f.name for f in dataclasses.fields(AgentConfig)]
    return {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one agent and write its logs")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--quiet", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("eval", help="evaluate a checkpoint with the deterministic policy")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("compare", help="train several configs over several seeds")
    p.add_argument("--configs", nargs="+", required=True)
    p.add_argument("--seeds", default="0..4")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)

    p = sub.add_parser("diagnose", help="re-export error snapshots and the noise model from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--out", help="output directory (defaults to the checkpoint's directory)")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    return parser


def cmd_train(args) -> int:
    overrides = _overrides(args)
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.config:
        cfg = load_config(args.config, **overrides)
    else:
        cfg = config_from_dict(overrides)
    progress = None if args.quiet else (lambda row: print(f"step {row[0]:>8d}  return {row[1]:10.2f} +- {row[2]:.2f}", flush=True))
    log = train(cfg, progress=progress)
    log.write(args.out)
    print(json.dumps({"out": args.out, "final_mean_return": log.final_return, "gradient_steps": log.gradient_steps}))
    return 0


def cmd_eval(args) -> int:
    cfg, agent = load_checkpoint(args.checkpoint)
    mean, std = evaluate(agent.policy, make_env(cfg.env), args.episodes, args.seed)
    print(json.dumps({"mean_return": mean, "std_return": std, "episodes": args.episodes}))
    return 0


def cmd_compare(args) -> int:
    overrides = _overrides(args)
    configs = [load_config(path, **overrides) for path in args.configs]
    rows, checkpoints = compare(configs, parse_seeds(args.seeds), args.out, jobs=args.jobs)
    for row in checkpoints:
        se = "n/a" if row["stderr"] is None else f"{row['stderr']:.2f}"
        print(f"{row['algorithm']:>10s} {row['checkpoint']:>4s} step {row['env_step']:>7d}  {row['mean_return']:10.2f} +- {se}")
    return 0


def cmd_diagnose(args) -> int:
    cfg, agent = load_checkpoint(args.checkpoint)
    src_dir = os.path.dirname(os.path.abspath(args.checkpoint))
    out = args.out or src_dir
    os.makedirs(out, exist_ok=True)
    report = {"env": cfg.env, "preset": cfg.preset, "alpha": agent.temp.alpha}

    model = agent.noise.model if agent.noise is not None else None
    if model is not None:
        with open(os.path.join(out, "gmm.json"), "w") as fh:
            json.dump(model.to_dict(), fh, indent=2)
        draws = gmm.sample(model, np.random.default_rng(args.seed), args.samples)
        counts, edges = np.histogram(draws, bins=args.bins, density=True)
        with open(os.path.join(out, "gmm_histogram.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("bin_left", "bin_right", "density"))
            writer.writerows(zip(edges[:-1], edges[1:], counts))
        mean, var, third = model.moments()
        report["gmm"] = {"weights": model.weights.tolist(), "means": model.m.tolist(), "mean": mean, "variance": var, "skewness": third / var**1.5}

    errors_path = os.path.join(src_dir, "errors.csv")
    if os.path.exists(errors_path):
        snaps = read_errors_csv(errors_path)
        write_summary_json(snaps, os.path.join(out, "snapshots.json"))
        with open(os.path.join(out, "histograms.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("step", "bin_left", "bin_right", "pre", "neg_noise_shifted", "post"))
            for snap in snaps:
                h = noise_histogram(snap, args.bins)
                for j in range(args.bins):
                    writer.writerow((snap.step, h["edges"][j], h["edges"][j + 1], h["pre"][j], h["neg_noise_shifted"][j], h["post"][j]))
        report["snapshots"] = len(snaps)
    print(json.dumps(report, indent=2))
    return 0


COMMANDS = {"train": cmd_train, "eval": cmd_eval, "compare": cmd_compare, "diagnose": cmd_diagnose}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
