import numpy as np
import pandas as pd
import pytest

from Functions.Evaluation import (
    METRICS,
    PSNR_CAP,
    BlockMatchingFlow,
    bootstrap_aggregate,
    centroid_trajectory,
    clip_pcc,
    cosine,
    epe,
    evaluate_reconstructions,
    hue_histogram,
    hue_pcc,
    nway_top1,
    psnr,
    read_report,
    retrieval,
    retrieval_ranks,
    ssim,
    ssim_clip,
    velocity_sign_agreement,
    vifi_score,
    write_report,
)
from Functions.SemanticDecoder.decoder import _topk1
from Functions.errors import MetricError


class _UniformClassifier:
    name = "uniform"
    n_classes = 10

    def classify_image(self, frame):
        return np.full(10, 0.1)

    def classify_video(self, frames):
        return np.full(10, 0.1)


def _textured(rng, size=32):
    return rng.random((3, size, size)).astype(np.float32)


class TestFixedPoints:
    def test_identical_clips(self, raw_splits, embedder, flow_backend):
        clip = raw_splits[1].frames[0]
        assert ssim(clip[0], clip[0]) == pytest.approx(1.0)
        assert psnr(clip[0], clip[0]) == PSNR_CAP
        assert hue_pcc(clip, clip) == pytest.approx(1.0)
        assert vifi_score(clip, clip, embedder) == pytest.approx(1.0)
        assert epe(clip, clip, flow_backend) == 0.0

    def test_psnr_of_a_known_error(self):
        gt = np.zeros((3, 8, 8))
        assert psnr(gt, gt + 0.1) == pytest.approx(20.0)

    def test_shape_mismatch(self, rng):
        with pytest.raises(MetricError):
            ssim_clip(rng.random((2, 3, 16, 16)), rng.random((3, 3, 16, 16)))
        with pytest.raises(MetricError):
            cosine(np.zeros(3), np.ones(3))


def _painted(colours, size=32):
    """Un frame con una franja vertical por color sobre fondo negro."""
    frame = np.zeros((3, size, size))
    width = size // (2 * len(colours))
    for index, colour in enumerate(colours):
        frame[:, :, 2 * index * width:(2 * index + 1) * width] = np.asarray(colour)[:, None, None]
    return frame


RED, GREEN, CYAN, MAGENTA = (1, 0, 0), (0, 1, 0), (0, 1, 1), (1, 0, 1)


class TestHuePcc:
    def test_moving_a_colour_patch_keeps_the_score_at_one(self):
        square = np.zeros((1, 3, 32, 32))
        square[0, 0, 4:12, 4:12] = 1.0
        shifted = np.roll(square, shift=10, axis=3)
        assert hue_pcc(square, shifted) == pytest.approx(1.0)

    def test_half_turn_of_hue_gives_minus_one(self):
        clip = _painted([RED, GREEN])[None]
        rotated = _painted([CYAN, MAGENTA])[None]
        assert hue_pcc(clip, rotated) == pytest.approx(-1.0)

    def test_opposite_single_hues(self):
        assert hue_pcc(_painted([RED])[None], _painted([CYAN])[None]) == pytest.approx(-1.0)

    def test_histogram_is_smoothed_with_the_cosine_kernel(self):
        smoothed = hue_histogram(_painted([RED]))
        expected = smoothed[0] * np.cos(2.0 * np.pi * np.arange(32) / 32)
        np.testing.assert_allclose(smoothed, expected, atol=1e-9)

    def test_zero_histogram_scores_zero(self, rng):
        grey = np.repeat(rng.random((1, 1, 16, 16)), 3, axis=1)
        black = np.zeros((1, 3, 16, 16))
        coloured = rng.random((1, 3, 16, 16))
        np.testing.assert_array_equal(hue_histogram(black[0]), 0.0)
        assert hue_pcc(grey, coloured) == 0.0
        assert hue_pcc(black, black) == 0.0


class TestClipPcc:
    def test_gate_is_strict(self, raw_splits, embedder):
        clip = raw_splits[1].frames[0]
        assert clip_pcc(clip, 0.6, embedder, threshold=0.6) == 0.0
        assert clip_pcc(clip, 0.61, embedder, threshold=0.6) > 0.0

    def test_static_clip_is_perfectly_consistent(self, raw_splits, embedder):
        static = np.repeat(raw_splits[1].frames[0, :1], 4, axis=0)
        assert clip_pcc(static, 1.0, embedder) == pytest.approx(1.0)

    def test_needs_two_frames(self, raw_splits, embedder):
        with pytest.raises(MetricError):
            clip_pcc(raw_splits[1].frames[0, :1], 1.0, embedder)


class TestFlow:
    def test_block_matching_recovers_a_translation(self, rng):
        frame = _textured(rng)
        shifted = np.roll(frame, shift=(1, 2), axis=(1, 2))
        field = BlockMatchingFlow().flow(frame, shifted)
        assert field.shape == (2, 32, 32)
        np.testing.assert_array_equal(field[0, 8:24, 8:24], 2.0)
        np.testing.assert_array_equal(field[1, 8:24, 8:24], 1.0)

    def test_epe_penalises_wrong_motion(self, rng, flow_backend):
        frame = _textured(rng)
        moving = np.stack([np.roll(frame, shift=k, axis=2) for k in range(3)])
        static = np.stack([frame] * 3)
        assert epe(moving, static, flow_backend) > 0.5

    def test_frame_size_must_tile_blocks(self, rng, flow_backend):
        with pytest.raises(MetricError):
            flow_backend.flow(rng.random((3, 12, 16)), rng.random((3, 12, 16)))


class TestCentroid:
    def test_square_centroid_is_its_centre(self):
        clip = np.zeros((2, 3, 16, 16))
        clip[0, 0, 2:6, 4:8] = 1.0
        clip[1, 2, 10:14, 4:8] = 0.5
        np.testing.assert_allclose(centroid_trajectory(clip), [[6.0, 4.0], [6.0, 12.0]])

    def test_empty_frame_gives_nan(self):
        assert np.isnan(centroid_trajectory(np.zeros((1, 3, 8, 8)))).all()

    def test_ground_truth_motion_agrees_and_reversed_motion_disagrees(self, raw_splits):
        train = raw_splits[0]
        velocities = train.ground_truth["velocities"]
        assert velocity_sign_agreement(train.frames, velocities) == 1.0
        assert velocity_sign_agreement(train.frames[:, ::-1], velocities) == 0.0

    def test_slow_components_are_skipped(self, raw_splits):
        train = raw_splits[0]
        with pytest.raises(MetricError, match="min_speed"):
            velocity_sign_agreement(train.frames[:1], np.zeros((1, 2)))
        with pytest.raises(MetricError):
            velocity_sign_agreement(train.frames[:2], np.ones((3, 2)))


class TestNway:
    def test_uniform_classifier_is_at_chance(self, rng):
        clip = rng.random((2, 3, 8, 8))
        rates = [nway_top1(clip, clip, 2, 1000, "image", _UniformClassifier(), seed) for seed in range(10)]
        assert np.mean(rates) == pytest.approx(0.5, abs=0.02)

    def test_identical_clips_are_always_recognised(self, raw_splits, classifier):
        clip = raw_splits[1].frames[0]
        assert nway_top1(clip, clip, 2, 50, "video", classifier, 0) == 1.0

    def test_invalid_mode(self, raw_splits, classifier):
        clip = raw_splits[1].frames[0]
        with pytest.raises(MetricError):
            nway_top1(clip, clip, 2, 10, "audio", classifier)


class TestRetrieval:
    def test_perfect_queries(self, rng):
        candidates = rng.standard_normal((20, 8))
        assert retrieval(candidates * 3.0, candidates, (1, 5)) == {1: 1.0, 5: 1.0}
        assert retrieval_ranks(candidates, candidates).tolist() == [0] * 20

    def test_random_queries_sit_at_chance(self, rng):
        queries = rng.standard_normal((1200, 16))
        candidates = rng.standard_normal((1200, 16))
        scores = retrieval(queries, candidates, (10, 100))
        assert scores[10] == pytest.approx(10 / 1200, abs=0.01)
        assert scores[100] == pytest.approx(100 / 1200, abs=0.03)

    def test_ties_count_against_the_true_candidate(self):
        candidates = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert retrieval_ranks(candidates, candidates).tolist() == [1, 1, 0]
        assert retrieval(candidates, candidates, (1, 2)) == {1: pytest.approx(1 / 3), 2: 1.0}

    def test_decoder_validation_uses_the_same_tie_rule(self):
        candidates = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert _topk1(candidates, candidates) == pytest.approx(1 / 3)

    def test_k_is_clipped_to_the_candidate_count(self, rng):
        assert retrieval(rng.standard_normal((3, 4)), rng.standard_normal((3, 4)), (100,)) == {100: 1.0}

    def test_missing_true_candidate(self, rng):
        with pytest.raises(MetricError):
            retrieval(rng.standard_normal((5, 4)), rng.standard_normal((3, 4)))


class TestBootstrap:
    def test_constant_values_have_a_degenerate_interval(self):
        result = bootstrap_aggregate([0.25] * 10, n_boot=50, seed=1)
        assert (result.mean, result.ci_low, result.ci_high) == (0.25, 0.25, 0.25)
        assert result.n_samples == 10

    def test_seeded_and_ordered(self, rng):
        values = rng.random(30)
        a = bootstrap_aggregate(values, 100, [3, 1])
        assert a == bootstrap_aggregate(values, 100, [3, 1])
        assert a.ci_low <= a.mean <= a.ci_high

    def test_empty_values(self):
        with pytest.raises(MetricError):
            bootstrap_aggregate([], 10)


class TestReport:
    def test_noise_ceiling_report(self, raw_splits, embedder, classifier, flow_backend, tiny_config, tmp_path):
        test = raw_splits[1]
        ids = list(range(len(test)))
        report = evaluate_reconstructions(test, test.frames, ids, embedder, classifier, flow_backend, tiny_config)
        assert [record["sample_id"] for record in report.records] == ids
        assert set(report.aggregates) == set(METRICS)
        assert report.mean("ssim") == pytest.approx(1.0)
        assert report.mean("epe") == 0.0
        assert report.mean("two_way_V") == 1.0

        write_report(report, tmp_path, xlsx=True)
        assert pd.ExcelFile(tmp_path / "metrics.xlsx", engine="openpyxl").sheet_names == ["per_sample", "aggregates"]
        assert (tmp_path / "per_sample.csv").exists()
        assert read_report(tmp_path).aggregates == report.aggregates

    def test_report_is_reproducible(self, raw_splits, embedder, classifier, flow_backend, tiny_config, rng):
        test = raw_splits[1]
        noisy = np.clip(test.frames + 0.05 * rng.standard_normal(test.frames.shape), 0, 1).astype(np.float32)
        ids = list(range(len(test)))
        a = evaluate_reconstructions(test, noisy, ids, embedder, classifier, flow_backend, tiny_config)
        b = evaluate_reconstructions(test, noisy, ids, embedder, classifier, flow_backend, tiny_config)
        assert a.to_dict() == b.to_dict()

    def test_mismatched_ids(self, raw_splits, embedder, classifier, flow_backend, tiny_config):
        test = raw_splits[1]
        with pytest.raises(MetricError):
            evaluate_reconstructions(test, test.frames, [0], embedder, classifier, flow_backend, tiny_config)
