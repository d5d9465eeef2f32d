"""
Decodificador estructural: fMRI -> latente del primer frame.

Perceptrón de dos capas entrenado con MSE contra Φ(primer frame), con
warmup lineal del learning rate.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from Functions.DataIO.dataset import VideoDataset
from Functions.errors import DecoderError
from Functions.Training import (
    LossGuard,
    LossHistory,
    iterate_batches,
    load_arrays_for,
    load_module_arrays,
    mean_loss,
    progress,
    save_module,
    seeded_generator,
    split_train_val,
    warmup_schedule,
)

logger = logging.getLogger(__name__)

STATE_KIND = "structure"
HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "lr"]


class StructureDecoder(nn.Module):
    def __init__(self, n_voxels: int, latent_shape: Tuple[int, ...], hidden: int = 1024):
        super().__init__()
        self.n_voxels = n_voxels
        self.latent_shape = tuple(latent_shape)
        self.mlp = nn.Sequential(
            nn.Linear(n_voxels, hidden), nn.GELU(),
            nn.Linear(hidden, int(np.prod(latent_shape))),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.mlp(x).view(-1, *self.latent_shape)


@dataclass
class StructureDecoderState:
    model: StructureDecoder
    config: Dict[str, Any]
    history: LossHistory = field(default_factory=lambda: LossHistory(HISTORY_COLUMNS))

    @property
    def n_voxels(self) -> int:
        return self.model.n_voxels

    @property
    def latent_shape(self) -> Tuple[int, ...]:
        return self.model.latent_shape


def structure_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """MSE entre latentes predichos y Φ(primer frame)."""
    if pred.shape != target.shape:
        raise DecoderError(f"structure_loss: formas distintas {tuple(pred.shape)} vs {tuple(target.shape)}")
    return F.mse_loss(pred, target)


def build_structure_decoder(model_config: Dict[str, Any]) -> StructureDecoder:
    return StructureDecoder(model_config["n_voxels"], tuple(model_config["latent_shape"]),
                            hidden=model_config["hidden"])


def first_frame_latents(dataset: VideoDataset, tokenizer) -> np.ndarray:
    """Objetivos: Φ(v_{i,1}) para cada clip."""
    return tokenizer.encode(dataset.frames[:, 0])


def train_structure(dataset: VideoDataset, config, tokenizer,
                    seed: Optional[int] = None) -> StructureDecoderState:
    """
    Entrena el decodificador estructural.

    Args:
        dataset: Split de entrenamiento (último val_fraction = validación)
        config: RunConfig (structure_lr, structure_epochs, structure_warmup, ...)
        tokenizer: Backend tokenizer (define los objetivos)
        seed: Semilla (por defecto config.seed)

    Returns:
        StructureDecoderState con historial (epoch, train_loss, val_loss, lr)
    """
    seed = config.seed if seed is None else seed
    targets = torch.from_numpy(first_frame_latents(dataset, tokenizer))
    generator = seeded_generator(seed)
    model_config = {"n_voxels": dataset.manifest.n_voxels, "latent_shape": list(targets.shape[1:]),
                    "hidden": config.structure_hidden}
    model = build_structure_decoder(model_config)
    state = StructureDecoderState(model=model, config=model_config)

    train_idx, val_idx = split_train_val(len(dataset), config.val_fraction)
    fmri = torch.from_numpy(dataset.fmri)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.structure_lr)
    scheduler = warmup_schedule(optimizer, config.structure_warmup)
    guard = LossGuard(STATE_KIND, divergence_factor=config.divergence_factor)
    step = 0

    for epoch in progress(range(1, config.structure_epochs + 1), "structure", config.structure_epochs):
        model.train()
        total, count = 0.0, 0
        for batch in iterate_batches(train_idx, config.structure_batch, generator):
            loss = structure_loss(model(fmri[batch]), targets[batch])
            guard.check(loss.item(), epoch, step)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            scheduler.step()
            step += 1
            total += loss.item() * len(batch)
            count += len(batch)

        model.eval()
        with torch.no_grad():
            val_loss = float(structure_loss(model(fmri[val_idx]), targets[val_idx])) if len(val_idx) else float("nan")
        state.history.append(epoch=epoch, train_loss=mean_loss(total, count), val_loss=val_loss,
                             lr=optimizer.param_groups[0]["lr"])

    model.eval()
    logger.info("✅ Decodificador estructural entrenado (%d pasos)", step)
    return state


def decode_structure(state: StructureDecoderState, x: np.ndarray) -> np.ndarray:
    """fMRI (V,) o (N×V) -> latente(s) del primer frame."""
    x = np.asarray(x, dtype=np.float32)
    single = x.ndim == 1
    batch = x[None] if single else x
    if batch.ndim != 2 or batch.shape[1] != state.n_voxels:
        raise DecoderError(f"Vector de {batch.shape[-1]} voxels; el decodificador espera {state.n_voxels}")
    state.model.eval()
    with torch.no_grad():
        latents = state.model(torch.from_numpy(batch)).numpy()
    return latents[0] if single else latents


def save_structure(state: StructureDecoderState, directory: Union[str, Path],
                   meta: Optional[Dict[str, Any]] = None) -> Path:
    directory = Path(directory)
    save_module(directory, state.model, STATE_KIND, {"model_config": state.config, **(meta or {})})
    if len(state.history):
        state.history.write_csv(directory / "loss_history.csv")
    return directory


def load_structure(directory: Union[str, Path]) -> StructureDecoderState:
    meta, arrays = load_arrays_for(directory, STATE_KIND)
    model = load_module_arrays(build_structure_decoder(meta["model_config"]), arrays)
    model.eval()
    history_path = Path(directory) / "loss_history.csv"
    history = LossHistory.read_csv(history_path) if history_path.exists() else LossHistory(HISTORY_COLUMNS)
    return StructureDecoderState(model=model, config=meta["model_config"], history=history)
