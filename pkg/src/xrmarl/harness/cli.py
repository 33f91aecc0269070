"""Command line: ``xrmarl train|eval|compare``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ALGORITHMS, RING_NAMES, ConfigError, ExperimentConfig, load_config, parse_ring
from .experiment import InvariantViolation, evaluate_checkpoint, run_aps, run_single
from .outputs import emit_outputs, run_directory

EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO = 2, 3, 4

log = logging.getLogger("xrmarl")


def _common(p: argparse.ArgumentParser, algo_help: str) -> None:
    p.add_argument("--config", type=Path, help="flat YAML key: value file")
    p.add_argument("--algo", help=algo_help)
    p.add_argument("--ring", help="near | mid | far | inner-outer (metres)")
    p.add_argument("--seeds", help="e.g. 0,1,2 or 0-9")
    p.add_argument("--out", help="output directory")
    p.add_argument("--steps", type=int, help="environment-step budget per run")
    p.add_argument("--episodes", type=int, help="episode budget per run")
    p.add_argument("--eval-episodes", type=int, dest="eval_episodes",
                   help="greedy evaluation episodes after training")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="xrmarl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("train", help="train oqmix or qmix"), "oqmix | qmix")
    _common(sub.add_parser("eval", help="evaluate checkpoints, or run APS"),
            "oqmix | qmix | aps")
    _common(sub.add_parser("compare", help="sweep algorithms x rings and aggregate"),
            "comma list of algorithms, or all")
    return parser


def _base_config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return cfg.with_overrides(seeds=args.seeds, out=args.out, steps=args.steps,
                              episodes=args.episodes, eval_episodes=args.eval_episodes)


def _split(value: str | None, allowed, default) -> list[str]:
    if value is None:
        return list(default)
    if value == "all":
        return list(allowed)
    items = [v.strip() for v in value.split(",") if v.strip()]
    bad = [v for v in items if v not in allowed]
    if bad:
        raise ConfigError(f"unknown value(s) {bad}; choose from {list(allowed)}")
    return items


def cmd_train(args) -> list:
    cfg = _base_config(args)
    algo = args.algo or cfg.algo
    if algo not in ("oqmix", "qmix"):
        raise ConfigError("train needs --algo oqmix or qmix (APS has nothing to train; use eval)")
    cfg = cfg.with_overrides(algo=algo, ring=args.ring)
    out = Path(cfg.out)
    records = [run_single(cfg, s, run_directory(out, cfg.algo, cfg.ring, s)) for s in cfg.seeds]
    emit_outputs(records, out, cfg)
    return records


def cmd_eval(args) -> list:
    cfg = _base_config(args)
    cfg = cfg.with_overrides(algo=args.algo or cfg.algo, ring=args.ring)
    out = Path(cfg.out)
    records = []
    for seed in cfg.seeds:
        if cfg.algo == "aps":
            records.append(run_aps(cfg, seed))
            continue
        ck = run_directory(out, cfg.algo, cfg.ring, seed) / "checkpoint.npz"
        if not ck.exists():
            raise FileNotFoundError(f"no checkpoint at {ck}; run train first")
        records.append(evaluate_checkpoint(cfg, seed, ck))
    dest = out if cfg.algo == "aps" else out / "eval"
    emit_outputs(records, dest, cfg)
    return records


def cmd_compare(args) -> list:
    cfg = _base_config(args)
    algos = _split(args.algo, ALGORITHMS, ALGORITHMS)
    rings = ([parse_ring(r) for r in args.ring.split(",")] if args.ring and args.ring != "all"
             else list(RING_NAMES.values()))
    out = Path(cfg.out)
    records = []
    for ring in rings:
        for algo in algos:
            run_cfg = cfg.with_overrides(algo=algo, ring=f"{ring[0]}-{ring[1]}")
            for seed in run_cfg.seeds:
                log.info("compare: %s ring=%s seed=%d", algo, ring, seed)
                records.append(run_single(run_cfg, seed,
                                          run_directory(out, algo, ring, seed)))
    emit_outputs(records, out, replace(cfg, algo=algos[0]))
    return records


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"train": cmd_train, "eval": cmd_eval, "compare": cmd_compare}[args.command]
    try:
        records = handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    for r in records:
        s = r.summary
        print(f"{r.run_id}: success={s['success_rate']:.3f} plr={s['plr']:.4f} "
              f"throughput={s['throughput_mbps']:.2f} Mbps xqi={s['xqi']:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
