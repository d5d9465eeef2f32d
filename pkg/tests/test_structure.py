import numpy as np
import pytest
import torch

from Functions.DataIO import (
    DatasetManifest,
    SyntheticConfig,
    VideoDataset,
    generate_synthetic_dataset,
    shape_descriptor,
    true_weights,
)
from Functions.Encoders.vocabulary import PALETTE
from Functions.StructureDecoder import (
    StructureDecoder,
    decode_structure,
    first_frame_latents,
    load_structure,
    save_structure,
    structure_loss,
    train_structure,
)
from Functions.Training import split_train_val, warmup_schedule
from Functions.errors import DecoderError


def test_loss_is_mean_squared_error():
    pred = torch.tensor([[1.0, 2.0], [3.0, 4.0]])
    target = torch.zeros(2, 2)
    assert float(structure_loss(pred, target)) == pytest.approx(7.5)
    with pytest.raises(DecoderError):
        structure_loss(pred, torch.zeros(4))


def test_targets_are_first_frame_latents(prepared_splits, tokenizer):
    train = prepared_splits[0]
    latents = first_frame_latents(train, tokenizer)
    assert latents.shape == (len(train), 3, 4, 4, 64)
    np.testing.assert_allclose(tokenizer.decode(latents[0]), train.frames[0, 0], atol=1e-5)


def test_decoder_output_shape():
    model = StructureDecoder(10, (3, 4, 4, 64), hidden=8)
    assert model(torch.zeros(2, 10)).shape == (2, 3, 4, 4, 64)


def test_train_decode_and_reload(prepared_splits, tiny_config, tokenizer, tmp_path):
    train, test = prepared_splits
    state = train_structure(train, tiny_config, tokenizer, seed=0)
    assert state.latent_shape == (3, 4, 4, 64)
    lrs = state.history.column("lr")
    assert len(lrs) == tiny_config.structure_epochs
    assert lrs[-1] == pytest.approx(tiny_config.structure_lr)

    latents = decode_structure(state, test.fmri)
    assert latents.shape == (len(test), 3, 4, 4, 64)
    save_structure(state, tmp_path / "structure")
    np.testing.assert_allclose(decode_structure(load_structure(tmp_path / "structure"), test.fmri[1]),
                               latents[1], atol=1e-6)


def test_training_lowers_the_loss(prepared_splits, tiny_config, tokenizer):
    config = tiny_config.replace(structure_epochs=15)
    state = train_structure(prepared_splits[0], config, tokenizer, seed=0)
    losses = state.history.column("train_loss")
    assert losses[-1] < losses[0]


def test_wrong_voxel_count(prepared_splits, tiny_config, tokenizer):
    state = train_structure(prepared_splits[0], tiny_config.replace(structure_epochs=0), tokenizer)
    with pytest.raises(DecoderError):
        decode_structure(state, np.zeros((2, 3)))


def test_warmup_reaches_half_the_rate_halfway():
    param = torch.nn.Parameter(torch.zeros(1))
    optimizer = torch.optim.SGD([param], lr=1e-3)
    scheduler = warmup_schedule(optimizer, 50)
    for _ in range(25):
        optimizer.step()
        scheduler.step()
    assert optimizer.param_groups[0]["lr"] == pytest.approx(5e-4)
    for _ in range(25):
        optimizer.step()
        scheduler.step()
    assert optimizer.param_groups[0]["lr"] == pytest.approx(1e-3)


def test_training_follows_the_warmup(prepared_splits, tiny_config, tokenizer):
    # 22 clips de entrenamiento en un solo batch: un paso por época
    config = tiny_config.replace(structure_epochs=25, structure_warmup=50, structure_batch=22)
    lrs = train_structure(prepared_splits[0], config, tokenizer, seed=0).history.column("lr")
    assert lrs[0] == pytest.approx(config.structure_lr / 50)
    assert lrs[24] == pytest.approx(0.5 * config.structure_lr)


def _linear_world(n=320, rank=3, n_voxels=24, seed=0):
    """Primer frame = 0.5 + combinación de `rank` patrones; fMRI lineal en los mismos códigos."""
    rng = np.random.default_rng(seed)
    patterns = rng.uniform(-0.1, 0.1, size=(rank, 3, 32, 32))
    codes = rng.uniform(-1.0, 1.0, size=(n, rank))
    first = 0.5 + np.einsum("nr,rchw->nchw", codes, patterns)
    frames = np.repeat(first[:, None], 2, axis=1)
    fmri = codes @ rng.standard_normal((rank, n_voxels))
    manifest = DatasetManifest(name="linear", split="train", n_samples=n, n_voxels=n_voxels,
                               frames_per_clip=2, frame_size=(32, 32))
    return VideoDataset(manifest, fmri, frames, [""] * n)


@pytest.mark.slow
def test_linear_coupling_is_learned_below_a_tenth_of_the_variance(tiny_config, tokenizer):
    dataset = _linear_world()
    config = tiny_config.replace(structure_epochs=100, structure_hidden=128, structure_batch=32,
                                 structure_lr=1e-3, structure_warmup=10)
    state = train_structure(dataset, config, tokenizer, seed=0)

    targets = first_frame_latents(dataset, tokenizer).reshape(len(dataset), -1)
    train_idx, val_idx = split_train_val(len(dataset), config.val_fraction)
    variance = targets[val_idx].var(axis=0).mean()
    constant = ((targets[val_idx] - targets[train_idx].mean(axis=0)) ** 2).mean()
    val_loss = state.history.column("val_loss")[-1]
    assert val_loss <= 0.1 * variance
    assert val_loss < constant


@pytest.mark.slow
def test_red_square_decodes_red(tiny_config, embedder, tokenizer):
    config = tiny_config.replace(synth_n_train=400, synth_noise=0.0, synth_n_voxels=64, synth_n_signal_voxels=0,
                                 structure_epochs=60, structure_hidden=256, structure_batch=32,
                                 structure_lr=1e-3, structure_warmup=5)
    synthetic = SyntheticConfig.from_run_config(config, "train")
    state = train_structure(generate_synthetic_dataset(synthetic, embedder), config, tokenizer, seed=0)

    weights, _ = true_weights(synthetic)
    descriptor = shape_descriptor("square", 16, (16.0, 16.0), (0.0, 0.0), PALETTE["red"], (32, 32),
                                  synthetic.max_speed)
    fmri = (descriptor @ weights.T).astype(np.float32)
    frame = tokenizer.decode(decode_structure(state, fmri[None])[0])
    red, green, blue = frame[:, 8:24, 8:24].mean(axis=(1, 2))
    assert red > green
    assert red > blue
