from __future__ import annotations

import numpy as np
import pytest

from avblend.avspace import build_frame_index
from avblend.blending import (
    AugmentConfig,
    augment,
    balance_report,
    blend_frame_based,
    blend_full_weighted,
    blend_random,
    blend_selective,
    resample_video,
    sample_kept,
    sample_weight,
)
from avblend.dataset import COEFF_DIM, Dataset, VideoRecord, split_by_subject
from avblend.selection import SelectionConfig

from conftest import make_video

from test_avspace import brute_force_nearest


def pair(seed=0, n=6):
    rng = np.random.default_rng(seed)
    src = make_video("src", subject="s1", n_frames=n, seed=seed * 2 + 1)
    tgt = make_video("tgt", subject="s2", n_frames=n, seed=seed * 2 + 2)
    return src, tgt


class TestResample:
    def test_same_length_is_identity(self):
        v = make_video("v", n_frames=3, seed=1)
        out = resample_video(v, 3)
        assert np.array_equal(out.coeffs, v.coeffs) and np.array_equal(out.labels, v.labels)

    def test_linear_channel(self):
        coeffs = np.zeros((2, COEFF_DIM))
        coeffs[1, 0] = 1.0
        v = VideoRecord(id="v", subject_id="s", coeffs=coeffs, labels=np.zeros((2, 2)))
        out = resample_video(v, 3)
        assert np.allclose(out.coeffs[:, 0], [0.0, 0.5, 1.0])
        assert np.all(out.coeffs[:, 1:] == 0.0)

    def test_constant_channel_stays_constant(self):
        v = make_video("v", n_frames=5, coeff_fill=1.25)
        for new_len in (1, 2, 7, 50):
            out = resample_video(v, new_len)
            assert np.all(out.coeffs == 1.25)
            assert len(out) == new_len

    def test_zero_length_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            resample_video(make_video("v"), 0)

    def test_labels_resampled_too(self):
        labels = np.array([[0.0, -1.0], [1.0, 1.0]])
        v = make_video("v", n_frames=2, labels=labels)
        out = resample_video(v, 3)
        assert np.allclose(out.labels[:, 0], [0.0, 0.5, 1.0])
        assert np.allclose(out.labels[:, 1], [-1.0, 0.0, 1.0])


class TestFullWeighted:
    def test_midpoint(self):
        src = make_video("src", n_frames=2, coeff_fill=1.0)
        tgt = make_video("tgt", n_frames=2, coeff_fill=3.0)
        out = blend_full_weighted(src, tgt, 0.5)
        assert np.all(out.coeffs == 2.0)

    def test_w1_copies_source_exactly(self):
        src, tgt = pair(seed=3)
        out = blend_full_weighted(src, tgt, 1.0)
        assert np.array_equal(out.coeffs, src.coeffs)
        assert np.array_equal(out.labels, src.labels)
        assert out.provenance.label_weight == 1.0

    def test_w025_label_arithmetic(self):
        labels_src = np.tile([0.8, 0.0], (2, 1))
        labels_tgt = np.tile([-0.4, 0.0], (2, 1))
        src = make_video("src", n_frames=2, labels=labels_src)
        tgt = make_video("tgt", n_frames=2, labels=labels_tgt)
        out = blend_full_weighted(src, tgt, 0.25)
        assert out.labels[0, 0] == pytest.approx(-0.1, abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            blend_full_weighted(make_video("a", n_frames=2), make_video("b", n_frames=3), 0.5)

    def test_weight_range(self):
        src, tgt = pair()
        with pytest.raises(ValueError, match="weight"):
            blend_full_weighted(src, tgt, 1.2)

    def test_provenance_populated(self):
        src, tgt = pair(seed=5)
        out = blend_full_weighted(src, tgt, 0.4, new_id="syn_src_0", seed=77)
        p = out.provenance
        assert out.id == "syn_src_0" and out.synthetic
        assert (p.source_id, p.target_id, p.blend_method, p.alignment) == (
            "src", "tgt", "full_weighted", "video_based"
        )
        assert p.weight == 0.4 and p.label_weight == 0.4 and p.seed == 77
        assert p.kept_indices is None


class TestRandomBlend:
    def test_kept_all_copies_source(self):
        src, tgt = pair(seed=7)
        out = blend_random(src, tgt, tuple(range(COEFF_DIM)))
        assert np.array_equal(out.coeffs, src.coeffs)
        assert out.provenance.label_weight == 1.0
        assert np.array_equal(out.labels, src.labels)

    def test_label_weight_counts_kept(self):
        src, tgt = pair(seed=8)
        out = blend_random(src, tgt, tuple(range(25)))
        assert out.provenance.label_weight == 0.5

    def test_dimension_routing(self):
        src = make_video("src", n_frames=1, coeff_fill=2.0)
        coeffs_tgt = np.full((1, COEFF_DIM), -1.0)
        tgt = VideoRecord(id="tgt", subject_id="s", coeffs=coeffs_tgt, labels=np.zeros((1, 2)))
        out = blend_random(src, tgt, (0,))
        assert out.coeffs[0, 0] == 2.0
        assert out.coeffs[0, 1] == -1.0

    def test_labels_blend_with_kept_fraction(self):
        labels_src = np.tile([0.5, -0.5], (3, 1))
        labels_tgt = np.tile([-0.5, 0.5], (3, 1))
        src = make_video("src", n_frames=3, labels=labels_src)
        tgt = make_video("tgt", n_frames=3, labels=labels_tgt)
        out = blend_random(src, tgt, tuple(range(10)))  # label weight 0.2
        assert np.allclose(out.labels[:, 0], 0.2 * 0.5 + 0.8 * -0.5)

    def test_invalid_kept(self):
        src, tgt = pair()
        with pytest.raises(ValueError, match="kept"):
            blend_random(src, tgt, (3, 1))
        with pytest.raises(ValueError, match="kept"):
            blend_random(src, tgt, (0, 50))


class TestSelectiveBlend:
    def test_empty_kept_equals_full_weighted(self):
        src, tgt = pair(seed=9)
        a = blend_selective(src, tgt, (), 0.4)
        b = blend_full_weighted(src, tgt, 0.4)
        assert np.array_equal(a.coeffs, b.coeffs)
        assert np.array_equal(a.labels, b.labels)
        assert a.provenance.label_weight == b.provenance.label_weight == 0.4

    def test_label_weight_formula(self):
        src, tgt = pair(seed=10)
        out = blend_selective(src, tgt, tuple(range(25)), 0.5)
        assert out.provenance.label_weight == pytest.approx(0.75, abs=1e-15)  # (25 + 12.5)/50

    def test_kept_all_copies_source(self):
        src, tgt = pair(seed=11)
        out = blend_selective(src, tgt, tuple(range(COEFF_DIM)), 0.3)
        assert np.array_equal(out.coeffs, src.coeffs)
        assert out.provenance.label_weight == 1.0

    def test_kept_dims_from_source_rest_blended(self):
        src = make_video("src", n_frames=1, coeff_fill=2.0)
        tgt = make_video("tgt", n_frames=1, coeff_fill=-2.0)
        out = blend_selective(src, tgt, (0, 1), 0.25)
        assert out.coeffs[0, 0] == 2.0 and out.coeffs[0, 1] == 2.0
        assert out.coeffs[0, 2] == pytest.approx(0.25 * 2.0 + 0.75 * -2.0)


class TestSamplers:
    def test_weights_in_band_over_10k_draws(self):
        rng = np.random.default_rng(0)
        ws = [sample_weight(rng) for _ in range(10_000)]
        assert all(0.25 <= w <= 0.75 for w in ws)
        assert min(ws) < 0.30 and max(ws) > 0.70  # actually spans the band

    def test_kept_subsets_sized_10_to_40(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            kept = sample_kept(rng)
            assert 10 <= len(kept) <= 40
            assert list(kept) == sorted(set(kept))
            assert all(0 <= i < COEFF_DIM for i in kept)


class TestFrameBased:
    def test_exact_av_matches_reproduce_source_labels(self):
        rng = np.random.default_rng(2)
        labels = rng.uniform(-0.9, 0.9, size=(5, 2))
        src = make_video("src", n_frames=5, labels=labels, seed=1)
        pool_video = make_video("pool", n_frames=5, labels=labels, seed=2)  # same labels, other coeffs
        idx = build_frame_index([pool_video], cells_per_axis=8)
        out = blend_frame_based(src, idx, "full_weighted", np.random.default_rng(3), target_id="pool")
        assert np.allclose(out.labels, src.labels, atol=1e-15)
        assert out.provenance.alignment == "frame_based"

    def test_single_frame_source_gets_global_nearest(self):
        src = make_video("src", n_frames=1, labels=np.array([[0.1, 0.1]]), coeff_fill=1.0)
        videos = [make_video(f"p{i}", n_frames=10, seed=i) for i in range(3)]
        idx = build_frame_index(videos, cells_per_axis=8)
        want = brute_force_nearest(videos, 0.1, 0.1)
        result = blend_frame_based(src, idx, "random", np.random.default_rng(0))
        kept = result.provenance.kept_indices
        free = [i for i in range(COEFF_DIM) if i not in kept]
        matched = idx.videos[want[0]].coeffs[want[1]]
        assert np.allclose(result.coeffs[0, free], matched[free])

    def test_matches_equal_brute_force_over_pool(self):
        pool = [make_video(f"p{i}", n_frames=100, seed=100 + i) for i in range(3)]
        src = make_video("src", n_frames=10, seed=50)
        idx = build_frame_index(pool, cells_per_axis=16)
        out = blend_frame_based(src, idx, "full_weighted", np.random.default_rng(9))
        w = out.provenance.weight
        for t in range(len(src)):
            vid, frame, _ = brute_force_nearest(pool, float(src.labels[t, 0]), float(src.labels[t, 1]))
            matched = idx.videos[vid].coeffs[frame]
            expect = w * src.coeffs[t] + (1 - w) * matched
            assert np.allclose(out.coeffs[t], expect, atol=1e-12)

    def test_source_must_be_excluded_from_index(self):
        src = make_video("src", n_frames=3, seed=1)
        idx = build_frame_index([src], cells_per_axis=4)
        with pytest.raises(ValueError, match="exclude"):
            blend_frame_based(src, idx, "full_weighted", np.random.default_rng(0))


def split_corpus(corpus: Dataset, seed=1) -> Dataset:
    return split_by_subject(corpus, (0.8, 0.1, 0.1), seed=seed)


class TestAugment:
    def test_single_pair(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        cfg = AugmentConfig(selection=SelectionConfig(n_sources=1, n_targets_per_source=1), seed=4)
        out = augment(d, cfg)
        syn = [v for v in out.videos if v.synthetic]
        assert len(syn) == 1
        assert syn[0].id.startswith("syn_") and syn[0].id.endswith("_0")
        assert out.split[syn[0].id] == "train"

    def test_counting_and_ids(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        cfg = AugmentConfig(selection=SelectionConfig(n_sources=4, n_targets_per_source=3), seed=4)
        out = augment(d, cfg)
        syn = [v for v in out.videos if v.synthetic]
        assert len(syn) == 12
        for v in syn:
            src = v.provenance.source_id
            assert v.id in {f"syn_{src}_{k}" for k in range(3)}
            assert v.provenance.target_id != src
            assert len(v) == len(out.by_id()[src])  # video_based keeps source length

    def test_requires_split(self, small_corpus):
        d, _ = small_corpus
        cfg = AugmentConfig(selection=SelectionConfig(n_sources=1, n_targets_per_source=1), seed=0)
        with pytest.raises(ValueError, match="split"):
            augment(d, cfg)

    def test_pool_too_small(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        n_train = len(d.partition("train"))
        cfg = AugmentConfig(selection=SelectionConfig(n_sources=n_train + 1, n_targets_per_source=1), seed=0)
        with pytest.raises(ValueError, match="exceeds pool size"):
            augment(d, cfg)

    def test_thread_count_invariance(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        sel = SelectionConfig(n_sources=3, n_targets_per_source=2)
        outs = [
            augment(d, AugmentConfig(selection=sel, seed=9, threads=t))
            for t in (1, 2, 8)
        ]
        ref = outs[0]
        for other in outs[1:]:
            assert [v.id for v in other.videos] == [v.id for v in ref.videos]
            for a, b in zip(ref.videos, other.videos):
                assert np.array_equal(a.coeffs, b.coeffs)
                assert np.array_equal(a.labels, b.labels)
                assert a.provenance == b.provenance

    def test_deterministic_in_seed(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        sel = SelectionConfig(n_sources=3, n_targets_per_source=2)
        a = augment(d, AugmentConfig(selection=sel, seed=9))
        b = augment(d, AugmentConfig(selection=sel, seed=9))
        for va, vb in zip(a.videos, b.videos):
            assert va.id == vb.id and np.array_equal(va.coeffs, vb.coeffs)

    @pytest.mark.parametrize("method", ["random", "selective_weighted", "full_weighted"])
    @pytest.mark.parametrize("alignment", ["video_based", "frame_based"])
    def test_convexity_and_label_closure(self, small_corpus, method, alignment):
        d, _ = small_corpus
        d = split_corpus(d)
        cfg = AugmentConfig(
            selection=SelectionConfig(n_sources=2, n_targets_per_source=2),
            blend_method=method,
            alignment=alignment,
            seed=13,
        )
        out = augment(d, cfg)
        by_id = out.by_id()
        for v in out.videos:
            if not v.synthetic:
                continue
            assert np.all(np.abs(v.labels) <= 1.0)
            if alignment == "video_based":
                src = by_id[v.provenance.source_id]
                tgt = resample_video(by_id[v.provenance.target_id], len(src))
                lo = np.minimum(src.coeffs, tgt.coeffs) - 1e-12
                hi = np.maximum(src.coeffs, tgt.coeffs) + 1e-12
                assert np.all(v.coeffs >= lo) and np.all(v.coeffs <= hi)

    def test_frame_based_weight_and_provenance(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        cfg = AugmentConfig(
            selection=SelectionConfig(n_sources=2, n_targets_per_source=2),
            alignment="frame_based",
            seed=21,
        )
        out = augment(d, cfg)
        syn = [v for v in out.videos if v.synthetic]
        assert len(syn) == 4
        for v in syn:
            assert v.provenance.alignment == "frame_based"
            assert 0.25 <= v.provenance.weight <= 0.75

    def test_sampled_weights_within_band(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        n_train = len(d.partition("train"))
        cfg = AugmentConfig(
            selection=SelectionConfig(n_sources=min(6, n_train), n_targets_per_source=5), seed=17
        )
        out = augment(d, cfg)
        for v in out.videos:
            if v.synthetic:
                assert 0.25 <= v.provenance.weight <= 0.75

    def test_kbin_clustering_mode(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        cfg = AugmentConfig(
            selection=SelectionConfig(n_sources=2, n_targets_per_source=1), clustering="kbin", K=16, seed=3
        )
        out = augment(d, cfg)
        assert sum(1 for v in out.videos if v.synthetic) == 2


class TestLinearOracleConsistency:
    def test_full_weighted_commutes_with_oracle(self, small_corpus):
        d, oracle = small_corpus
        rng = np.random.default_rng(31)
        videos = d.videos
        for _ in range(25):
            i, j = rng.choice(len(videos), size=2, replace=False)
            src, tgt = videos[i], videos[j]
            tgt_aligned = resample_video(tgt, len(src))
            w = float(rng.uniform(0.25, 0.75))
            out = blend_full_weighted(src, tgt_aligned, w)
            expect = oracle.labels_for(out.coeffs)
            assert np.max(np.abs(out.labels - expect)) <= 1e-12


class TestBalanceReport:
    def test_skewed_corpus_entropy_increases(self, skewed_corpus):
        d, _ = skewed_corpus
        d = split_by_subject(d, (0.8, 0.1, 0.1), seed=7)
        cfg = AugmentConfig(
            selection=SelectionConfig(n_sources=24, n_targets_per_source=6, target_strategy="similar"),
            clustering="kmeans",
            K=16,
            seed=7,
        )
        out = augment(d, cfg)
        rep = balance_report(d, out, K=16)
        assert rep.n_synthetic == 144
        assert rep.entropy_after > rep.entropy_before
        assert rep.min_count_after >= rep.min_count_before

    def test_report_counts_only_new_synthetics(self, small_corpus):
        d, _ = small_corpus
        d = split_corpus(d)
        cfg = AugmentConfig(selection=SelectionConfig(n_sources=1, n_targets_per_source=2), seed=2)
        out = augment(d, cfg)
        rep = balance_report(d, out, K=16)
        assert rep.n_synthetic == 2
