"""A/B harness: does augmentation help where the training data is thin?"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

import numpy as np

from .data import Corpus, load_corpus, make_windows, stack_windows
from .train import TrainConfig, ccc_scores, predict, train

QUADRANTS = ("++", "+-", "-+", "--")


def quadrant_of(arousal: float, valence: float) -> str:
    return ("+" if arousal >= 0 else "-") + ("+" if valence >= 0 else "-")


def underrepresented_quadrant(
    corpus: Corpus, partition: str = "train", test_window_counts: dict[str, int] | None = None, min_test_windows: int = 2
) -> tuple[str, dict[str, int]]:
    """Quadrant with the fewest non-synthetic videos by mean AV.

    When ``test_window_counts`` is given, only quadrants with at least
    ``min_test_windows`` test windows qualify (a slice needs ground truth to
    score); the global minimum is the fallback if none qualify.
    """
    counts = {q: 0 for q in QUADRANTS}
    for v in corpus.partition(partition):
        if v.synthetic:
            continue
        mean = v.labels.mean(axis=0)
        counts[quadrant_of(float(mean[0]), float(mean[1]))] += 1
    candidates = list(QUADRANTS)
    if test_window_counts is not None:
        scoreable = [q for q in QUADRANTS if test_window_counts.get(q, 0) >= min_test_windows]
        if scoreable:
            candidates = scoreable
    rare = min(candidates, key=lambda q: (counts[q], q))
    return rare, counts


def check_split_compatibility(baseline: Corpus, augmented: Corpus) -> None:
    """Augmented must equal baseline plus synthetic train-only videos."""
    base = baseline.split_map()
    aug = augmented.split_map()
    for vid, part in base.items():
        if aug.get(vid) != part:
            raise ValueError(f"split mismatch for video {vid!r}: baseline {part!r}, augmented {aug.get(vid)!r}")
    extra = set(aug) - set(base)
    by_id = {v.id: v for v in augmented.videos}
    for vid in extra:
        if not by_id[vid].synthetic or aug[vid] != "train":
            raise ValueError(f"augmented corpus adds non-synthetic or non-train video {vid!r}")


def _slice_scores(pred, truth, mask) -> dict[str, float] | None:
    if mask.sum() < 2:
        return None
    return ccc_scores(pred[mask], truth[mask])


def ab_compare(
    baseline_manifest: str | Path,
    augmented_manifest: str | Path,
    cfg: TrainConfig,
    n_seeds: int = 5,
    out_dir: str | Path | None = None,
) -> dict:
    """Train baseline and augmented variants over seeds; report test CCC
    overall and on the underrepresented-quadrant slice."""
    baseline = load_corpus(baseline_manifest)
    augmented = load_corpus(augmented_manifest)
    check_split_compatibility(baseline, augmented)

    test_samples = make_windows(baseline, "test", cfg.window, cfg.stride, cfg.label_reduction)
    test_x, test_y = stack_windows(test_samples)
    window_counts = {q: 0 for q in QUADRANTS}
    for s in test_samples:
        window_counts[quadrant_of(*s.label)] += 1
    rare, quadrant_counts = underrepresented_quadrant(baseline, test_window_counts=window_counts)
    slice_mask = np.array([quadrant_of(*s.label) == rare for s in test_samples])

    runs = []
    for seed in range(n_seeds):
        seed_cfg = replace(cfg, seed=seed)
        entry: dict = {"seed": seed}
        for name, corpus in (("baseline", baseline), ("augmented", augmented)):
            result = train(corpus, seed_cfg)
            pred = predict(result.model, test_x)
            entry[name] = {
                "overall": ccc_scores(pred, test_y),
                "slice": _slice_scores(pred, test_y, slice_mask),
                "best_epoch": result.best_epoch,
            }
        entry["augmented_wins_slice"] = (
            entry["augmented"]["slice"]["ccc_mean"] > entry["baseline"]["slice"]["ccc_mean"]
            if entry["augmented"]["slice"] and entry["baseline"]["slice"]
            else None
        )
        runs.append(entry)

    wins = sum(1 for r in runs if r["augmented_wins_slice"])
    report = {
        "slice_definition": {
            "quadrant": rare,
            "rule": "fewest train videos among quadrants with scoreable test windows",
            "train_video_counts_by_quadrant": quadrant_counts,
            "test_window_counts_by_quadrant": window_counts,
            "n_test_windows": int(len(test_samples)),
            "n_slice_windows": int(slice_mask.sum()),
        },
        "n_seeds": n_seeds,
        "runs": runs,
        "mean_overall_ccc": {
            name: float(np.mean([r[name]["overall"]["ccc_mean"] for r in runs]))
            for name in ("baseline", "augmented")
        },
        "mean_slice_ccc": {
            name: float(np.mean([r[name]["slice"]["ccc_mean"] for r in runs if r[name]["slice"]]))
            for name in ("baseline", "augmented")
        },
        "augmented_slice_wins": wins,
    }

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "ab_report.json", "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2)
            f.write("\n")
        (out_dir / "ab_report.md").write_text(render_markdown(report), encoding="utf-8")
    return report


def render_markdown(report: dict) -> str:
    sl = report["slice_definition"]
    lines = [
        "# Augmentation A/B report",
        "",
        f"Underrepresented quadrant: `{sl['quadrant']}` "
        f"(train videos per quadrant: {sl['train_video_counts_by_quadrant']})",
        f"Test windows: {sl['n_test_windows']} total, {sl['n_slice_windows']} in the slice.",
        "",
        "| seed | baseline overall | augmented overall | baseline slice | augmented slice | slice win |",
        "|-----:|-----------------:|------------------:|---------------:|----------------:|:---------:|",
    ]
    for r in report["runs"]:
        b, a = r["baseline"], r["augmented"]
        win = {True: "yes", False: "no", None: "n/a"}[r["augmented_wins_slice"]]
        lines.append(
            f"| {r['seed']} | {b['overall']['ccc_mean']:.4f} | {a['overall']['ccc_mean']:.4f} "
            f"| {b['slice']['ccc_mean']:.4f} | {a['slice']['ccc_mean']:.4f} | {win} |"
        )
    lines += [
        "",
        f"Mean slice CCC: baseline {report['mean_slice_ccc']['baseline']:.4f}, "
        f"augmented {report['mean_slice_ccc']['augmented']:.4f}.",
        f"Augmented wins the slice in {report['augmented_slice_wins']} of {report['n_seeds']} seeds.",
        "",
    ]
    return "\n".join(lines)
