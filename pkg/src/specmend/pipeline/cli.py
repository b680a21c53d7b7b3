"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 data error (bad audio, manifests,
annotations, configs, profiles), 3 external transcriber failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from ..attack import AdaptiveRatioConfig
from ..errors import SpecmendError, TranscriberError
from .commands import cmd_attack, cmd_defend, cmd_estimate, cmd_evaluate, cmd_train
from .config import RunConfig, load_config, to_ini
from .manifest import load_manifest
from .profileio import load_profile

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_TOOL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_config_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="run configuration file (INI); defaults apply otherwise")


def _add_attack_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--ratio", type=float, help="component removal ratio in [0, 1)")
    p.add_argument("--granularity", choices=["phoneme", "word", "fixed"])
    p.add_argument("--fixed-ms", type=float, help="fixed segment duration in ms")
    p.add_argument("--retain-fraction", type=float, help="energy fraction kept in removed components")
    p.add_argument("--band", type=float, nargs=2, metavar=("LOW_HZ", "HIGH_HZ"))
    p.add_argument("--adaptive", action="store_true", help="draw a fresh ratio per unit")
    p.add_argument("--unit-ms", type=float, help="adaptive attack unit length in ms")
    p.add_argument("--ratio-low", type=float, help="adaptive ratio lower bound")
    p.add_argument("--ratio-high", type=float, help="adaptive ratio upper bound")
    p.add_argument("--seed", type=int, help="attack seed")


def _add_defense_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--segment-len", type=int, help="defense window length in samples (power of two)")
    p.add_argument("--filter-size", type=int, help="filter half-width L")
    p.add_argument("--ratio-grid", type=float, nargs="+", help="training ratios")
    p.add_argument("--batch-size", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specmend", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[], help="fit compensation filters and write a profile")
    _add_config_arg(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="profile output path")
    _add_attack_overrides(p)
    _add_defense_overrides(p)

    p = sub.add_parser("attack", help="write an attacked mirror of a corpus")
    _add_config_arg(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_attack_overrides(p)

    p = sub.add_parser("defend", help="run the defense over a corpus")
    _add_config_arg(p)
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--profile", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--noise-seed", type=int)

    p = sub.add_parser("estimate", help="print the estimated removal ratio of one file")
    _add_config_arg(p)
    p.add_argument("--audio", type=Path, required=True)
    _add_defense_overrides(p)
    p.add_argument("--threshold", type=float, help="weak-bin threshold (fraction of max magnitude)")
    p.add_argument("--cutoff", type=float, help="benign verdict cutoff")

    p = sub.add_parser("evaluate", help="score benign/attacked/defended corpora")
    _add_config_arg(p)
    p.add_argument("--manifest", type=Path, required=True, help="benign manifest with references")
    p.add_argument("--attacked", type=Path, required=True, help="attacked corpus directory")
    p.add_argument("--defended", type=Path, help="defended corpus directory (optional)")
    p.add_argument("--transcriber", help="command template with a {wav} placeholder")
    p.add_argument("--hyp-ext", help="extension of pre-computed hypothesis sidecar files")
    p.add_argument("--out", type=Path, help="report path (default: stdout)")

    sub.add_parser("defaults", help="print the default configuration")
    return parser


def _load_run_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()

    attack = cfg.attack
    updates = {}
    if getattr(args, "ratio", None) is not None:
        updates["removal_ratio"] = args.ratio
    if getattr(args, "granularity", None):
        updates["granularity"] = args.granularity
    if getattr(args, "fixed_ms", None) is not None:
        updates["fixed_ms"] = args.fixed_ms
    if getattr(args, "retain_fraction", None) is not None:
        updates["retain_fraction"] = args.retain_fraction
    if getattr(args, "band", None):
        updates["band"] = tuple(args.band)
    if getattr(args, "adaptive", False) or any(
        getattr(args, k, None) is not None for k in ("unit_ms", "ratio_low", "ratio_high")
    ):
        base = attack.adaptive or AdaptiveRatioConfig(80.0, 0.01, 0.95, 0)
        updates["adaptive"] = AdaptiveRatioConfig(
            unit_ms=args.unit_ms if getattr(args, "unit_ms", None) is not None else base.unit_ms,
            ratio_low=args.ratio_low if getattr(args, "ratio_low", None) is not None else base.ratio_low,
            ratio_high=args.ratio_high if getattr(args, "ratio_high", None) is not None else base.ratio_high,
            seed=base.seed,
        )
    if updates:
        attack = dataclasses.replace(attack, **updates)

    defense = cfg.defense
    d_updates = {}
    if getattr(args, "segment_len", None) is not None:
        d_updates["segment_len"] = args.segment_len
    if getattr(args, "filter_size", None) is not None:
        d_updates["filter_size"] = args.filter_size
    if getattr(args, "ratio_grid", None):
        d_updates["ratio_grid"] = tuple(args.ratio_grid)
    if getattr(args, "batch_size", None) is not None:
        d_updates["batch_size"] = args.batch_size
    if getattr(args, "threshold", None) is not None:
        d_updates["weak_bin_threshold"] = args.threshold
    if getattr(args, "cutoff", None) is not None:
        d_updates["benign_cutoff"] = args.cutoff
    if d_updates:
        defense = dataclasses.replace(defense, **d_updates)

    return dataclasses.replace(
        cfg,
        attack=attack,
        defense=defense,
        attack_seed=args.seed if getattr(args, "seed", None) is not None else cfg.attack_seed,
        noise_seed=args.noise_seed if getattr(args, "noise_seed", None) is not None else cfg.noise_seed,
        transcriber=getattr(args, "transcriber", None) or cfg.transcriber,
    )


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "defaults":
        print(to_ini(RunConfig()), end="")
        return EXIT_OK
    cfg = _load_run_config(args)
    if args.command == "train":
        cmd_train(load_manifest(args.manifest), cfg, args.out, print)
    elif args.command == "attack":
        cmd_attack(load_manifest(args.manifest), cfg, args.out, print)
    elif args.command == "defend":
        cmd_defend(load_manifest(args.manifest), load_profile(args.profile), cfg, args.out, print)
    elif args.command == "estimate":
        cmd_estimate(args.audio, cfg)
    elif args.command == "evaluate":
        manifest = load_manifest(args.manifest)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                cmd_evaluate(manifest, args.attacked, args.defended, cfg, fh, args.hyp_ext)
        else:
            cmd_evaluate(manifest, args.attacked, args.defended, cfg, sys.stdout, args.hyp_ext)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except TranscriberError as exc:
        print(f"specmend: transcriber error: {exc}", file=sys.stderr)
        return EXIT_TOOL
    except (SpecmendError, ValueError) as exc:
        print(f"specmend: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"specmend: i/o error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
