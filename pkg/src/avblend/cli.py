"""Command-line pipeline: gen, split, analyze, augment, eval.

Exit codes: 0 success, 1 I/O failure, 2 configuration or validation error.
Progress goes to stderr; machine-readable results go to files only. Every
run writes a ``run.json`` echoing the resolved configuration. The recorded
configuration omits ``--threads``: outputs are defined to be identical for
any thread count, so it is an execution detail, not part of the run.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import figures
from .avspace import frame_histogram, kbin_cluster, kmeans_cluster, occupancy_report, video_stats
from .blending import AugmentConfig, augment, balance_report
from .dataset import Dataset, load_dataset, save_dataset, split_by_subject, video_csv_paths
from .metrics import eval_predictions, save_metrics
from .selection import SelectionConfig
from .synthgen import GenConfig, generate_corpus

BLEND_FLAG_TO_METHOD = {
    "random": "random",
    "selective-weighted": "selective_weighted",
    "full-weighted": "full_weighted",
}
ALIGNMENT_FLAG_TO_MODE = {"video-based": "video_based", "frame-based": "frame_based"}


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_run_json(out_dir: Path, command: str, config: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "run.json", "w", encoding="utf-8", newline="") as f:
        json.dump({"command": command, "config": config}, f, indent=2, sort_keys=True)
        f.write("\n")


def _partition_videos(d: Dataset, partition: str):
    if partition == "all":
        return list(d.videos)
    return d.partition(partition)


def cmd_gen(args) -> int:
    cfg = GenConfig(
        n_subjects=args.subjects,
        videos_per_subject=args.videos_per_subject,
        len_range=(args.len_min, args.len_max),
        fps=args.fps,
        n_harmonics=args.harmonics,
        skew_quadrant=args.skew,
        skew_fraction=args.skew_fraction,
        seed=args.seed,
    )
    out = Path(args.out)
    dataset, oracle = generate_corpus(cfg)
    _write_run_json(
        out,
        "gen",
        {
            "subjects": args.subjects,
            "videos_per_subject": args.videos_per_subject,
            "len_min": args.len_min,
            "len_max": args.len_max,
            "fps": args.fps,
            "harmonics": args.harmonics,
            "skew": args.skew,
            "skew_fraction": args.skew_fraction,
            "seed": args.seed,
            "out": args.out,
        },
    )
    manifest = save_dataset(dataset, out)
    oracle.save(out / "oracle.json")
    _progress(f"gen: wrote {len(dataset.videos)} videos to {manifest}")
    return 0


def cmd_split(args) -> int:
    ratios = tuple(float(x) for x in args.ratios.split(","))
    if len(ratios) != 3:
        raise ValueError(f"--ratios must be three comma-separated numbers, got {args.ratios!r}")
    d = load_dataset(args.data)
    if d.split is not None:
        _progress("split: dataset already has a split assignment; overwriting it")
    d = split_by_subject(d, ratios, seed=args.seed)
    out = Path(args.out) if args.out else Path(args.data).parent
    _write_run_json(out, "split", {"data": args.data, "ratios": args.ratios, "seed": args.seed, "out": args.out})
    manifest = save_dataset(d, out, copy_from=video_csv_paths(args.data))
    counts = {p: len(d.partition(p)) for p in ("train", "val", "test")}
    _progress(f"split: train/val/test = {counts['train']}/{counts['val']}/{counts['test']} -> {manifest}")
    return 0


def cmd_analyze(args) -> int:
    d = load_dataset(args.data)
    videos = _partition_videos(d, args.partition)
    if not videos:
        raise ValueError(f"partition {args.partition!r} has no videos")
    descs = [video_stats(v) for v in videos]
    if args.clustering == "kbin":
        clustering = kbin_cluster(descs, args.k)
    else:
        clustering = kmeans_cluster(descs, args.k, seed=args.seed)
    report = occupancy_report(clustering)
    hist = frame_histogram(videos, args.hist_bins)

    out = Path(args.out)
    _write_run_json(
        out,
        "analyze",
        {
            "data": args.data,
            "clustering": args.clustering,
            "k": args.k,
            "partition": args.partition,
            "hist_bins": args.hist_bins,
            "seed": args.seed,
            "figures": not args.no_figures,
            "out": args.out,
        },
    )
    with open(out / "occupancy.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["cluster_id", "count"])
        for cid, count in enumerate(report.counts):
            w.writerow([str(cid), str(count)])
    with open(out / "analysis.json", "w", encoding="utf-8", newline="") as f:
        json.dump(
            {"min_count": report.min_count, "entropy": report.entropy, "K": clustering.K, "method": clustering.method},
            f,
            indent=2,
            sort_keys=True,
        )
        f.write("\n")
    with open(out / "av_histogram.csv", "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["a_bin", "v_bin", "count"])
        for a in range(args.hist_bins):
            for v in range(args.hist_bins):
                w.writerow([str(a), str(v), str(int(hist[a, v]))])
    if not args.no_figures:
        figures.save_av_histogram(hist, out / "av_histogram.png", title=f"AV distribution ({args.partition})")
        figures.save_occupancy_bar(report.counts, out / "occupancy.png", title=f"{clustering.method} occupancy (K={clustering.K})")
    _progress(f"analyze: {len(videos)} videos, entropy {report.entropy:.4f}, min count {report.min_count}")
    return 0


def cmd_augment(args) -> int:
    d = load_dataset(args.data)
    if args.alignment == "frame-based":
        _progress("augment: frame-based alignment produces non-smooth sequences; video-based is the default")
    cfg = AugmentConfig(
        selection=SelectionConfig(
            n_sources=args.sources,
            n_targets_per_source=args.targets,
            target_strategy=args.strategy,
            seed=args.seed,
            exclude_same_subject=args.exclude_same_subject,
        ),
        clustering=args.clustering,
        K=args.k,
        alignment=ALIGNMENT_FLAG_TO_MODE[args.alignment],
        blend_method=BLEND_FLAG_TO_METHOD[args.blend],
        seed=args.seed,
        threads=args.threads,
    )
    augmented = augment(d, cfg)

    out = Path(args.out)
    _write_run_json(
        out,
        "augment",
        {
            "data": args.data,
            "sources": args.sources,
            "targets": args.targets,
            "strategy": args.strategy,
            "blend": args.blend,
            "alignment": args.alignment,
            "clustering": args.clustering,
            "k": args.k,
            "report_bins": args.report_bins,
            "exclude_same_subject": args.exclude_same_subject,
            "seed": args.seed,
            "figures": not args.no_figures,
            "out": args.out,
        },
    )
    manifest = save_dataset(augmented, out, copy_from=video_csv_paths(args.data))
    report = balance_report(d, augmented, K=args.report_bins)
    with open(out / "aug_report.json", "w", encoding="utf-8", newline="") as f:
        json.dump(report.to_json_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    if not args.no_figures:
        hist_before = frame_histogram(d.partition("train"), args.report_bins)
        hist_after = frame_histogram(augmented.partition("train"), args.report_bins)
        figures.save_balance_comparison(hist_before, hist_after, out / "balance.png")
    _progress(
        f"augment: {report.n_synthetic} synthetic videos, entropy "
        f"{report.entropy_before:.4f} -> {report.entropy_after:.4f} -> {manifest}"
    )
    return 0


def cmd_eval(args) -> int:
    d = load_dataset(args.data)
    metrics = eval_predictions(args.pred, d, args.partition, window=args.window, stride=args.stride)
    out = Path(args.out)
    _write_run_json(
        out,
        "eval",
        {
            "data": args.data,
            "pred": args.pred,
            "partition": args.partition,
            "window": args.window,
            "stride": args.stride,
            "out": args.out,
        },
    )
    save_metrics(out / "metrics.json", metrics)
    ccc_mean = metrics["ccc_mean"]
    _progress(f"eval: ccc_arousal={metrics['ccc_arousal']:.4f} ccc_valence={metrics['ccc_valence']:.4f} ccc_mean={ccc_mean:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="avblend", description="AV-space rebalancing by coefficient blending")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic oracle-labeled corpus")
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--videos-per-subject", type=int, required=True)
    p.add_argument("--len-min", type=int, default=150)
    p.add_argument("--len-max", type=int, default=300)
    p.add_argument("--fps", type=float, default=50.0)
    p.add_argument("--harmonics", type=int, default=4)
    p.add_argument("--skew", choices=["++", "+-", "-+", "--"], default=None, help="quadrant to bias toward (use --skew=-- for the negative quadrant)")
    p.add_argument("--skew-fraction", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("split", help="assign train/val/test partitions by subject")
    p.add_argument("--data", required=True, help="manifest path")
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory (default: rewrite next to the manifest)")
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("analyze", help="cluster occupancy and AV-distribution reports")
    p.add_argument("--data", required=True)
    p.add_argument("--clustering", choices=["kmeans", "kbin"], default="kbin")
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--partition", choices=["train", "val", "test", "all"], default="all")
    p.add_argument("--hist-bins", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("augment", help="extend the train partition with blended synthetic videos")
    p.add_argument("--data", required=True)
    p.add_argument("--sources", type=int, required=True)
    p.add_argument("--targets", type=int, required=True)
    p.add_argument("--strategy", choices=["random", "near", "similar"], default="similar")
    p.add_argument("--blend", choices=sorted(BLEND_FLAG_TO_METHOD), default="full-weighted")
    p.add_argument("--alignment", choices=sorted(ALIGNMENT_FLAG_TO_MODE), default="video-based")
    p.add_argument("--clustering", choices=["kmeans", "kbin"], default="kmeans")
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--report-bins", type=int, default=16)
    p.add_argument("--exclude-same-subject", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("eval", help="score a prediction file against window truths")
    p.add_argument("--data", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--partition", choices=["train", "val", "test", "all"], default="test")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--stride", type=int, default=50)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as e:
        _progress(f"error: {e}")
        return 1
    except ValueError as e:
        _progress(f"error: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
