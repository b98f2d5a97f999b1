"""Command-line entry point: train, predict, and a scheduler dry-run."""

from __future__ import annotations

import argparse
import logging
import sys

from .manifest import ManifestError
from .predict import predict
from .schedule import dry_run, reduction_count
from .train import TrainingError, TrainSpec, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cnn-trainer",
        description="Train a VGG-style crosswalk classifier from a dataset manifest",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train and write a checkpoint")
    p.add_argument("--manifest", required=True)
    p.add_argument("--images-root", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--epochs", type=int, default=TrainSpec.epochs)
    p.add_argument("--initial-lr", type=float, default=TrainSpec.initial_lr)
    p.add_argument("--batch-size", type=int, default=TrainSpec.batch_size)
    p.add_argument("--momentum", type=float, default=TrainSpec.momentum)
    p.add_argument("--weight-decay", type=float, default=TrainSpec.weight_decay)
    p.add_argument("--width-multiplier", type=float, default=TrainSpec.width_multiplier)
    p.add_argument("--seed", type=int, default=TrainSpec.seed)

    p = sub.add_parser("predict", help="write a prediction file for a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--images-root", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--out", required=True)

    p = sub.add_parser("lr-dry-run", help="print the per-epoch learning rates")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--initial-lr", type=float, default=TrainSpec.initial_lr)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ManifestError, TrainingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "train":
        spec = TrainSpec(
            epochs=args.epochs,
            initial_lr=args.initial_lr,
            batch_size=args.batch_size,
            momentum=args.momentum,
            weight_decay=args.weight_decay,
            width_multiplier=args.width_multiplier,
            seed=args.seed,
        )
        result = train(args.manifest, args.images_root, args.checkpoint, spec)
        last = result["history"][-1]
        print(
            f"trained {len(result['history'])} epochs; "
            f"final train loss {last['train_loss']:.4f}; "
            f"checkpoint {result['checkpoint']}"
        )
        return 0

    if args.command == "predict":
        result = predict(
            args.checkpoint, args.manifest, args.images_root, args.split, args.out
        )
        print(f"wrote {result['written']} predictions ({result['skipped']} skipped)")
        return 0

    if args.command == "lr-dry-run":
        lrs = dry_run(args.initial_lr, args.epochs)
        for epoch, lr in enumerate(lrs, 1):
            print(f"epoch {epoch}: lr {lr:g}")
        print(f"reductions: {reduction_count(lrs)}")
        return 0

    raise ValueError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
