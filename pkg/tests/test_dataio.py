import numpy as np
import pytest

from Functions.DataIO import (
    CAPTION_JOINER,
    SyntheticConfig,
    apply_hemodynamic_lag,
    apply_zscore,
    fit_zscore,
    generate_synthetic_dataset,
    pair_captions,
    pair_stimuli_with_bold,
    prepare_dataset,
    read_arrays,
    read_dataset,
    read_prepared,
    segment_and_downsample,
    select_voxels,
    write_arrays,
    write_dataset,
    write_prepared,
)
from Functions.Evaluation import centroid_trajectory
from Functions.errors import DatasetError


class TestSegmentation:
    def test_sixty_seconds_at_thirty_fps_gives_thirty_clips(self, rng):
        raw = rng.integers(0, 256, size=(1800, 3, 12, 16), dtype=np.uint8)
        clips = segment_and_downsample(raw, native_fps=30, clip_seconds=2, target_hz=4, out_size=(8, 8))
        assert len(clips) == 30
        assert clips[0].frames.shape == (8, 3, 8, 8)
        assert clips[-1].sample_id == 29

    def test_frames_are_sampled_at_the_target_rate(self):
        # frame t lleva el valor t/255: se puede leer qué frame se muestreó
        raw = np.arange(60, dtype=np.uint8)[:, None, None, None].repeat(3, 1).repeat(8, 2).repeat(8, 3)
        clips = segment_and_downsample(raw, native_fps=30, clip_seconds=1, target_hz=4, out_size=(8, 8))
        picked = np.rint(clips[1].frames[:, 0, 0, 0] * 255).astype(int)
        assert picked.tolist() == [30, 37, 45, 52]

    def test_video_shorter_than_a_clip_is_rejected(self, rng):
        with pytest.raises(DatasetError):
            segment_and_downsample(rng.random((10, 3, 8, 8)), 30, 2, 4, (8, 8))


class TestVoxelSelection:
    def test_reliable_voxels_win(self, rng):
        signal = rng.standard_normal((50, 1))
        a = rng.standard_normal((50, 10))
        b = rng.standard_normal((50, 10))
        a[:, [2, 7]] += 5 * signal
        b[:, [2, 7]] += 5 * signal
        selection = select_voxels(a, b, k=2)
        assert selection.kept_indices.tolist() == [2, 7]

    def test_zero_variance_voxel_scores_minus_infinity(self, rng):
        a = rng.standard_normal((20, 4))
        b = rng.standard_normal((20, 4))
        a[:, 1] = 3.0
        selection = select_voxels(a, b, k=3)
        assert np.isneginf(selection.scores[1])
        assert 1 not in selection.kept_indices

    def test_ties_break_by_ascending_index(self):
        a = np.tile(np.arange(5.0)[:, None], (1, 4))
        selection = select_voxels(a, a.copy(), k=2)
        assert selection.kept_indices.tolist() == [0, 1]

    def test_planted_tenth_is_recovered(self, rng):
        planted = np.sort(rng.choice(100, 10, replace=False))
        signal = rng.standard_normal((60, 10))
        a = rng.standard_normal((60, 100))
        b = rng.standard_normal((60, 100))
        a[:, planted] += 3 * signal
        b[:, planted] += 3 * signal
        assert select_voxels(a, b, k=10).kept_indices.tolist() == planted.tolist()

    def test_permuting_voxels_permutes_the_selection(self, rng):
        a, b = rng.standard_normal((2, 30, 20))
        a[:, :8] += b[:, :8]
        perm = rng.permutation(20)
        kept = select_voxels(a, b, k=5).kept_indices
        permuted = select_voxels(a[:, perm], b[:, perm], k=5).kept_indices
        np.testing.assert_array_equal(permuted, np.sort(np.argsort(perm)[kept]))

    def test_k_above_available_keeps_everything(self, rng):
        a, b = rng.standard_normal((2, 10, 3))
        assert select_voxels(a, b, k=10).kept_indices.tolist() == [0, 1, 2]


class TestLagAndZscore:
    def test_four_second_lag_at_tr_two_shifts_two_volumes(self):
        bold = np.arange(10)[:, None]
        stimuli, paired = pair_stimuli_with_bold(np.arange(10), bold, tr_seconds=2, lag_seconds=4)
        assert stimuli.tolist() == list(range(8))
        assert paired[:, 0].tolist() == list(range(2, 10))

    def test_negative_lag_keeps_the_overlap(self):
        bold = np.arange(10)[:, None]
        back = apply_hemodynamic_lag(apply_hemodynamic_lag(bold, 2, 4), 2, -4)
        np.testing.assert_array_equal(back[:, 0], np.arange(2, 8))

    @pytest.mark.parametrize("lag", [2, 4, 6])
    def test_lag_round_trip_recovers_the_overlap(self, rng, lag):
        bold = rng.standard_normal((12, 5))
        back = apply_hemodynamic_lag(apply_hemodynamic_lag(bold, 2, lag), 2, -lag)
        shift = lag // 2
        np.testing.assert_array_equal(back, bold[shift:len(bold) - shift])

    def test_lag_must_be_a_multiple_of_tr(self):
        with pytest.raises(DatasetError):
            apply_hemodynamic_lag(np.zeros((10, 2)), 2, 3)

    def test_zscore_uses_training_statistics(self, rng):
        train = rng.normal(5.0, 2.0, size=(200, 3))
        mean, std = fit_zscore(train)
        z = apply_zscore(train, mean, std)
        np.testing.assert_allclose(z.mean(axis=0), 0.0, atol=1e-5)
        np.testing.assert_allclose(z.std(axis=0), 1.0, atol=1e-4)
        constant = fit_zscore(np.ones((4, 2)))[1]
        assert constant.tolist() == [1.0, 1.0]


class TestCaptions:
    def test_close_similarities_pick_one_caption(self):
        result = pair_captions("a red circle", "a red circle moving left", 0.30, 0.33,
                               rng=np.random.default_rng(1))
        assert result in ("a red circle", "a red circle moving left")

    def test_distant_similarities_concatenate(self):
        result = pair_captions("a red circle", "a blue square", 0.1, 0.5)
        assert result == "a red circle" + CAPTION_JOINER + "a blue square"

    def test_threshold_is_inclusive(self):
        result = pair_captions("x", "y", 0.25, 0.5, threshold=0.25, rng=np.random.default_rng(0))
        assert CAPTION_JOINER not in result


class TestArrayStore:
    def test_byte_length_mismatch_is_detected(self, tmp_path, rng):
        write_arrays(tmp_path, {"fmri": rng.random((4, 3)).astype(np.float32)}, {"kind": "test"})
        (tmp_path / "fmri.f4").write_bytes(b"\x00" * 8)
        with pytest.raises(DatasetError, match="bytes"):
            read_arrays(tmp_path)

    def test_non_finite_floats_are_refused(self, tmp_path):
        with pytest.raises(DatasetError, match="no finitos"):
            write_arrays(tmp_path, {"x": np.array([1.0, np.nan])})

    def test_manifest_fields_come_back(self, tmp_path):
        write_arrays(tmp_path, {"ids": np.arange(3)}, {"kind": "ids"})
        meta, arrays = read_arrays(tmp_path)
        assert meta == {"kind": "ids"}
        assert arrays["ids"].dtype == np.dtype("<i8")


class TestSynthetic:
    def test_regeneration_is_identical(self, tiny_config, embedder, raw_splits):
        config = SyntheticConfig.from_run_config(tiny_config, "train")
        again = generate_synthetic_dataset(config, embedder)
        np.testing.assert_array_equal(again.fmri, raw_splits[0].fmri)
        np.testing.assert_array_equal(again.frames, raw_splits[0].frames)
        assert again.captions == raw_splits[0].captions

    def test_splits_share_the_coupling_but_not_the_clips(self, raw_splits):
        train, test = raw_splits
        np.testing.assert_array_equal(train.ground_truth["w_true"], test.ground_truth["w_true"])
        assert not np.array_equal(train.frames[0], test.frames[0])

    def test_noise_free_fmri_is_the_linear_coupling(self, tiny_config, embedder):
        config = SyntheticConfig.from_run_config(tiny_config.replace(synth_noise=0.0), "test")
        dataset = generate_synthetic_dataset(config, embedder)
        expected = dataset.ground_truth["descriptors"] @ dataset.ground_truth["w_true"].T
        np.testing.assert_allclose(dataset.fmri, expected, atol=1e-4)

    def test_only_signal_voxels_carry_weights(self, raw_splits, tiny_config):
        gt = raw_splits[0].ground_truth
        assert gt["signal_voxels"].size == tiny_config.synth_n_signal_voxels
        silent = np.setdiff1d(np.arange(tiny_config.synth_n_voxels), gt["signal_voxels"])
        assert np.all(gt["w_true"][silent] == 0)

    def test_frames_in_unit_range_with_shape(self, raw_splits, tiny_config):
        frames = raw_splits[0].frames
        assert frames.shape == (tiny_config.synth_n_train, 8, 3, 32, 32)
        assert frames.min() >= 0.0 and frames.max() <= 1.0

    def test_centroid_moves_by_the_velocity(self, raw_splits):
        gt = raw_splits[0].ground_truth
        for clip, velocity, start in zip(raw_splits[0].frames, gt["velocities"], gt["centers"]):
            trajectory = centroid_trajectory(clip)
            np.testing.assert_allclose(np.diff(trajectory, axis=0), np.tile(velocity, (len(clip) - 1, 1)), atol=0.5)
            np.testing.assert_allclose(trajectory[0], start, atol=0.5)

    def test_degenerate_geometry_is_rejected(self, embedder):
        with pytest.raises(DatasetError):
            generate_synthetic_dataset(SyntheticConfig(n_samples=2, frame_size=(16, 16), max_speed=4.0), embedder)


class TestDatasetStorage:
    def test_written_split_reads_back_bit_exact(self, tmp_path, raw_splits):
        test = raw_splits[1]
        write_dataset(test, tmp_path / "test")
        loaded = read_dataset(tmp_path / "test")
        np.testing.assert_array_equal(loaded.frames, test.frames)
        np.testing.assert_array_equal(loaded.fmri, test.fmri)
        assert loaded.captions == test.captions
        assert loaded.manifest == test.manifest

    def test_missing_captions_file(self, tmp_path, raw_splits):
        write_dataset(raw_splits[1], tmp_path / "test")
        (tmp_path / "test" / "captions.txt").unlink()
        with pytest.raises(DatasetError, match="captions"):
            read_dataset(tmp_path / "test")

    def test_subset_trims_per_sample_ground_truth(self, raw_splits):
        small = raw_splits[0].subset([0, 2])
        assert len(small) == 2
        assert small.ground_truth["velocities"].shape == (2, 2)
        assert small.ground_truth["repetitions"].shape[1] == 2


class TestPreparation:
    def test_keeps_k_voxels_and_zscores_with_train_stats(self, raw_splits, tiny_config):
        train, test, preparation = prepare_dataset(*raw_splits, voxel_k=tiny_config.voxel_k)
        assert train.manifest.n_voxels == test.manifest.n_voxels == tiny_config.voxel_k
        np.testing.assert_allclose(train.fmri.mean(axis=0), 0.0, atol=1e-4)
        np.testing.assert_allclose(preparation.apply(raw_splits[1].fmri), test.fmri, atol=1e-6)
        assert train.ground_truth["w_true"].shape[0] == tiny_config.voxel_k
        assert np.all(train.ground_truth["signal_voxels"] < tiny_config.voxel_k)

    def test_prepared_directory_reads_back(self, tmp_path, raw_splits, tiny_config):
        train, test, preparation = prepare_dataset(*raw_splits, voxel_k=tiny_config.voxel_k)
        write_prepared(tmp_path, train, test, preparation)
        loaded_train, loaded_test, loaded = read_prepared(tmp_path)
        np.testing.assert_array_equal(loaded.kept_indices, preparation.kept_indices)
        np.testing.assert_array_equal(loaded_test.fmri, test.fmri)
        assert len(loaded_train) == len(train)
