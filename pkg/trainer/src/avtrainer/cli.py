"""Trainer CLI: train, evaluate, ab."""

from __future__ import annotations

import argparse
import sys

from .abtest import ab_compare
from .train import TrainConfig, evaluate, load_checkpoint, train


def _config_from_args(args) -> TrainConfig:
    return TrainConfig(
        window=args.window,
        stride=args.stride,
        epochs=args.epochs,
        batch=args.batch,
        lr=args.lr,
        seed=args.seed,
        label_reduction=args.label_reduction,
    )


def _add_train_flags(p) -> None:
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--stride", type=int, default=50)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--batch", type=int, default=4)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--label-reduction", choices=["mean", "last"], default="mean")
    p.add_argument("--seed", type=int, default=0)


def cmd_train(args) -> int:
    result = train(args.data, _config_from_args(args), out_dir=args.out)
    print(
        f"train: best val ccc_mean {result.best_val_ccc:.4f} at epoch {result.best_epoch}",
        file=sys.stderr,
    )
    return 0


def cmd_evaluate(args) -> int:
    model, cfg = load_checkpoint(args.checkpoint)
    path = evaluate(
        model, args.data, args.partition, args.pred,
        window=cfg.window, stride=cfg.stride, label_reduction=cfg.label_reduction,
    )
    print(f"evaluate: wrote {path}", file=sys.stderr)
    return 0


def cmd_ab(args) -> int:
    report = ab_compare(args.baseline, args.augmented, _config_from_args(args), n_seeds=args.seeds, out_dir=args.out)
    print(
        f"ab: augmented wins slice in {report['augmented_slice_wins']}/{report['n_seeds']} seeds",
        file=sys.stderr,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avtrainer", description="GRU regression on coefficient corpora")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a corpus with a train/val split")
    p.add_argument("--data", required=True, help="manifest path")
    _add_train_flags(p)
    p.add_argument("--out", required=True, help="output directory for checkpoint.pt and history.json")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="write a prediction CSV for one partition")
    p.add_argument("--data", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--partition", default="test")
    p.add_argument("--pred", required=True, help="output prediction CSV path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ab", help="baseline-vs-augmented comparison over seeds")
    p.add_argument("--baseline", required=True)
    p.add_argument("--augmented", required=True)
    _add_train_flags(p)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ab)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
