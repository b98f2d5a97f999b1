"""Command-line entry point.

Stages: plan -> harvest -> annotate -> split -> train-baseline -> predict
-> eval -> compare.  All stages are driven by one JSON config file plus a
handful of flag overrides; every stage prints a short summary and exits
nonzero with a message on failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import baseline, pipeline
from .config import load_config
from .errors import ConfigError, XwalkError
from .store import SplitSpec


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", required=True, help="path to the harvest config JSON")
    p.add_argument("--seed", type=int, default=None, help="override the top-level seed")
    p.add_argument("--cache", default=None, help="override the cache directory")
    p.add_argument("--provider", choices=["live", "sim"], default=None)
    p.add_argument("--parallelism", type=int, default=None)


def _load(args) -> "HarvestConfig":
    overrides = {
        "seed": args.seed,
        "cache_dir": args.cache,
        "provider": args.provider,
        "parallelism": getattr(args, "parallelism", None),
    }
    return load_config(args.config, overrides)


def _split_spec(config) -> SplitSpec:
    return SplitSpec(
        test_fraction=config.split.test_fraction,
        val_fraction_of_trainval=config.split.val_fraction_of_trainval,
        negative_ratio=config.split.negative_ratio,
        seed=config.seed,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xwalk", description="Crosswalk imagery harvesting and evaluation pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="report the kept sub-regions")
    _add_config_flags(p)

    p = sub.add_parser("harvest", help="acquire images and write the manifest")
    _add_config_flags(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dry-run", action="store_true",
                   help="plan and count requests without fetching images")

    p = sub.add_parser("annotate", help="apply manual label overrides")
    p.add_argument("--manifest", required=True)
    p.add_argument("--overrides", required=True,
                   help="override file: sample_id<TAB>positive|negative")

    p = sub.add_parser("split", help="assign region-disjoint splits")
    _add_config_flags(p)
    p.add_argument("--manifest", required=True)

    p = sub.add_parser("train-baseline", help="train the reference classifier")
    _add_config_flags(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--images-root", required=True)
    p.add_argument("--model", required=True, help="output model path")

    p = sub.add_parser("predict", help="emit a prediction file for a split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--images-root", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--out", required=True, help="prediction file path")

    p = sub.add_parser("eval", help="evaluate a prediction file")
    p.add_argument("--manifest", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--report-out", default=None, help="machine-readable report path")

    p = sub.add_parser("compare", help="paired t-test over two per-run metric files")
    p.add_argument("metrics_a")
    p.add_argument("metrics_b")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, XwalkError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "plan":
        config = _load(args)
        kept = pipeline.plan(config)
        for sub in kept:
            b = sub.bounds
            print(
                f"{sub.parent_id}\t{b.bottom_left.lat:.6f},{b.bottom_left.lon:.6f}"
                f"\t{b.top_right.lat:.6f},{b.top_right.lon:.6f}"
            )
        print(f"kept sub-regions: {len(kept)}")
        return 0

    if args.command == "harvest":
        config = _load(args)
        report = pipeline.harvest(config, args.out, dry_run=args.dry_run)
        print(
            f"harvest complete: {report['samples']} samples "
            f"({report['positives']} positive / {report['negatives']} negative) "
            f"across {report['kept_sub_regions']} sub-regions"
        )
        return 0

    if args.command == "annotate":
        n = pipeline.annotate_stage(args.manifest, args.overrides)
        print(f"applied {n} overrides")
        return 0

    if args.command == "split":
        config = _load(args)
        counts = pipeline.split_stage(args.manifest, _split_spec(config))
        print(json.dumps(counts, sort_keys=True))
        return 0

    if args.command == "train-baseline":
        config = _load(args)
        history = pipeline.train_stage(
            args.manifest, args.images_root, args.model, _split_spec(config)
        )
        print(
            f"trained on {history['selected']} samples; "
            f"loss {history['loss_init']:.4f} -> {history['loss_final']:.4f}"
        )
        return 0

    if args.command == "predict":
        n = pipeline.predict_stage(
            args.manifest, args.images_root, args.model, args.split, args.out
        )
        print(f"wrote {n} predictions to {args.out}")
        return 0

    if args.command == "eval":
        report = pipeline.eval_stage(
            args.manifest, args.predictions, args.split, args.threshold
        )
        c = report.counts
        print(f"samples: {c.total}  (P={c.p} N={c.n})")
        print(f"accuracy: {report.accuracy:.4f}")
        print(f"f1: {report.f1:.4f}")
        print(f"precision: {report.precision:.4f}  recall: {report.recall:.4f}")
        print(
            f"per-class accuracy: positive {report.positive_accuracy:.4f}, "
            f"negative {report.negative_accuracy:.4f}"
        )
        if args.report_out:
            payload = dataclasses.asdict(report)
            payload["counts"] = dataclasses.asdict(c)
            Path(args.report_out).write_text(
                json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8"
            )
        return 0

    if args.command == "compare":
        result = pipeline.compare_stage(args.metrics_a, args.metrics_b)
        verdict = "significant" if result.significant else "not significant"
        print(
            f"t = {result.t:.4f}  p = {result.p_two_sided:.6g}  ({verdict} at 1e-4)"
        )
        return 0

    raise ConfigError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
