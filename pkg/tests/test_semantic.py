import math

import numpy as np
import pytest
import torch
import torch.nn.functional as F

from Functions.DataIO import SyntheticConfig, generate_synthetic_dataset
from Functions.SemanticDecoder import (
    AugmentationPolicy,
    SemanticDecoder,
    augment_text,
    augment_voxels,
    bi_infonce,
    combined_loss,
    combined_loss_terms,
    decode_semantic,
    load_semantic,
    load_synonyms,
    random_crop_resize,
    save_semantic,
    semantic_loss,
    train_semantic,
)
from Functions.errors import DecoderError


def _brute_force_infonce(z_hat, z, tau):
    b = z_hat.shape[0]
    total = 0.0
    for i in range(b):
        row = [math.exp(float(z_hat[i] @ z[k]) / tau) for k in range(b)]
        col = [math.exp(float(z_hat[k] @ z[i]) / tau) for k in range(b)]
        own = math.exp(float(z_hat[i] @ z[i]) / tau)
        total += math.log(own / sum(row)) + math.log(own / sum(col))
    return -total / b


class TestLosses:
    def test_orthonormal_pair_has_closed_form(self):
        z = torch.eye(2, dtype=torch.float64)
        loss = bi_infonce(z, z, 1.0)
        assert float(loss) == pytest.approx(2 * math.log(1 + math.exp(-1)), abs=1e-12)

    def test_matches_brute_force(self):
        generator = torch.Generator().manual_seed(0)
        z_hat = F.normalize(torch.randn(5, 8, generator=generator, dtype=torch.float64), dim=1)
        z = F.normalize(torch.randn(5, 8, generator=generator, dtype=torch.float64), dim=1)
        assert float(bi_infonce(z_hat, z, 0.3)) == pytest.approx(_brute_force_infonce(z_hat, z, 0.3), rel=1e-9)

    def test_alpha_mixes_text_and_video(self):
        generator = torch.Generator().manual_seed(1)
        f, t, v = (F.normalize(torch.randn(4, 6, generator=generator, dtype=torch.float64), dim=1)
                   for _ in range(3))
        assert float(semantic_loss(f, t, v, 1.0, 0.5)) == pytest.approx(float(bi_infonce(f, t, 0.5)))
        assert float(semantic_loss(f, t, v, 0.0, 0.5)) == pytest.approx(float(bi_infonce(f, v, 0.5)))

    def test_combined_loss_adds_weighted_terms(self):
        generator = torch.Generator().manual_seed(2)
        f, t, v = (F.normalize(torch.randn(3, 6, generator=generator, dtype=torch.float64), dim=1)
                   for _ in range(3))
        c_pred = torch.randn(3, 2, 4, generator=generator, dtype=torch.float64)
        c_true = torch.randn(3, 2, 4, generator=generator, dtype=torch.float64)
        terms = combined_loss_terms(f, t, c_pred, c_true, 0.01, 0.5, 0.5, v, 0.07)
        expected_projection = ((f - t) ** 2).sum(dim=1).mean()
        expected_condition = ((c_pred - c_true) ** 2).sum(dim=(1, 2)).mean()
        assert float(terms["projection"]) == pytest.approx(float(expected_projection))
        assert float(terms["condition"]) == pytest.approx(float(expected_condition))
        expected_total = expected_projection + 0.01 * terms["semantic"] + 0.5 * expected_condition
        assert float(combined_loss(f, t, c_pred, c_true, 0.01, 0.5, 0.5, v, 0.07)) == pytest.approx(
            float(expected_total))

    def test_gradient_matches_finite_differences(self):
        generator = torch.Generator().manual_seed(3)
        f = torch.randn(3, 5, generator=generator, dtype=torch.float64, requires_grad=True)
        t = F.normalize(torch.randn(3, 5, generator=generator, dtype=torch.float64), dim=1)
        v = F.normalize(torch.randn(3, 5, generator=generator, dtype=torch.float64), dim=1)
        c_true = torch.randn(3, 2, 2, generator=generator, dtype=torch.float64)
        c_pred = torch.randn(3, 2, 2, generator=generator, dtype=torch.float64, requires_grad=True)

        def loss(f_raw, c):
            return combined_loss(F.normalize(f_raw, dim=1), t, c, c_true, 0.01, 0.5, 0.5, v, 0.07)

        assert torch.autograd.gradcheck(loss, (f, c_pred))

    def test_single_pair_costs_nothing(self):
        z = F.normalize(torch.randn(1, 6, generator=torch.Generator().manual_seed(4), dtype=torch.float64), dim=1)
        assert float(bi_infonce(z, z.flip(1), 0.1)) == pytest.approx(0.0, abs=1e-12)

    def test_joint_row_permutation_leaves_the_loss_unchanged(self):
        generator = torch.Generator().manual_seed(5)
        z_hat = F.normalize(torch.randn(6, 8, generator=generator, dtype=torch.float64), dim=1)
        z = F.normalize(torch.randn(6, 8, generator=generator, dtype=torch.float64), dim=1)
        perm = torch.randperm(6, generator=generator)
        assert float(bi_infonce(z_hat[perm], z[perm], 0.2)) == pytest.approx(float(bi_infonce(z_hat, z, 0.2)),
                                                                          rel=1e-12)

    def test_aligned_pairs_vanish_as_tau_shrinks(self):
        z = torch.eye(4, dtype=torch.float64)
        losses = [float(bi_infonce(z, z, tau)) for tau in (1.0, 0.5, 0.2, 0.1, 0.05)]
        assert all(a > b for a, b in zip(losses, losses[1:]))
        assert losses[-1] < 1e-6

    def test_bad_inputs(self):
        z = torch.eye(2)
        with pytest.raises(DecoderError, match="tau"):
            bi_infonce(z, z, 0.0)
        with pytest.raises(DecoderError):
            bi_infonce(z, torch.eye(3), 1.0)
        with pytest.raises(DecoderError):
            bi_infonce(torch.full((2, 2), float("nan")), z, 1.0)
        with pytest.raises(DecoderError, match="alpha"):
            semantic_loss(z, z, z, 1.5, 1.0)


class TestAugmentation:
    def test_voxel_dropout_only_zeroes(self):
        x = torch.ones(64, 100)
        out = augment_voxels(x, AugmentationPolicy(), torch.Generator().manual_seed(0))
        zeroed = float((out == 0).float().mean())
        assert set(out.unique().tolist()) <= {0.0, 1.0}
        assert zeroed == pytest.approx(0.2 * 0.5, abs=0.02)

    def test_disabled_policy_is_identity(self, rng):
        x = torch.randn(4, 10)
        policy = AugmentationPolicy.disabled()
        assert torch.equal(augment_voxels(x, policy), x)
        assert augment_text("a small red circle", policy, load_synonyms(), rng) == "a small red circle"
        frame = rng.random((3, 16, 16)).astype(np.float32)
        assert random_crop_resize(frame, policy.crop_fraction, rng) is frame

    def test_text_augmentation_never_empties(self, rng):
        policy = AugmentationPolicy(synonym=1.0, insert=1.0, swap=1.0, delete=1.0)
        synonyms = load_synonyms()
        for _ in range(20):
            assert augment_text("circle", policy, synonyms, rng).strip()

    def test_invalid_probability(self):
        with pytest.raises(DecoderError):
            AugmentationPolicy(synonym=1.5)


class TestDecoder:
    def test_outputs_are_unit_embeddings_and_conditions(self):
        model = SemanticDecoder(12, hidden=16, head_hidden=8)
        f, c = model(torch.randn(3, 12))
        assert f.shape == (3, 512)
        assert c.shape == (3, 20, 768)
        torch.testing.assert_close(f.norm(dim=1), torch.ones(3))

    def test_train_decode_and_reload(self, prepared_splits, tiny_config, embedder, conditioner, tmp_path):
        train, test = prepared_splits
        state = train_semantic(train, tiny_config, embedder, conditioner, seed=0)
        assert state.history.column("epoch") == [1, 2]
        assert all(np.isfinite(state.history.column("train_loss")))

        f, c = decode_semantic(state, test.fmri)
        assert f.shape == (len(test), 512)
        assert c.shape == (len(test), 20, 768)
        np.testing.assert_allclose(np.linalg.norm(f, axis=1), 1.0, atol=1e-5)

        save_semantic(state, tmp_path / "semantic")
        reloaded = load_semantic(tmp_path / "semantic")
        f2, c2 = decode_semantic(reloaded, test.fmri[0])
        np.testing.assert_allclose(f2, f[0], atol=1e-6)
        np.testing.assert_allclose(c2, c[0], atol=1e-5)

    def test_training_is_seeded(self, prepared_splits, tiny_config, embedder, conditioner):
        train, test = prepared_splits
        a = train_semantic(train, tiny_config, embedder, conditioner, seed=4)
        b = train_semantic(train, tiny_config, embedder, conditioner, seed=4)
        np.testing.assert_array_equal(decode_semantic(a, test.fmri)[0], decode_semantic(b, test.fmri)[0])

    def test_wrong_voxel_count(self, prepared_splits, tiny_config, embedder, conditioner):
        state = train_semantic(prepared_splits[0], tiny_config.replace(semantic_epochs=0), embedder, conditioner)
        with pytest.raises(DecoderError, match="voxels"):
            decode_semantic(state, np.zeros(5))


@pytest.fixture(scope="module")
def noiseless_semantic(tiny_config, embedder, conditioner):
    """Decodificador entrenado 60 épocas sobre 400 clips sin ruido ni aumentación."""
    config = tiny_config.replace(synth_n_train=400, synth_n_test=50, synth_noise=0.0, synth_n_voxels=64,
                                 synth_n_signal_voxels=0, semantic_hidden=256, head_hidden=64,
                                 semantic_batch=16, semantic_lr=1e-3, semantic_epochs=60)
    train = generate_synthetic_dataset(SyntheticConfig.from_run_config(config, "train"), embedder)
    test = generate_synthetic_dataset(SyntheticConfig.from_run_config(config, "test"), embedder)
    state = train_semantic(train, config, embedder, conditioner, augmentation=AugmentationPolicy.disabled(),
                           seed=0)
    return state, test


@pytest.mark.slow
class TestNoiselessCoupling:
    def test_validation_top1_beats_five_times_chance_by_epoch_30(self, noiseless_semantic):
        state, _ = noiseless_semantic
        # 400 clips, los últimos 40 son validación
        assert state.history.column("val_top1")[29] >= 5 / 40

    def test_decoded_embeddings_point_at_their_clips(self, noiseless_semantic, embedder):
        state, test = noiseless_semantic
        f, _ = decode_semantic(state, test.fmri)
        cosines = (f * embedder.embed_videos(test.frames)).sum(axis=1)
        assert cosines.mean() >= 0.8
