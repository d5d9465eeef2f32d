"""
Baseline sin modelo de movimiento: n−1 MLPs independientes, MLP_j lleva
el fMRI a los tokens del frame j. No hay parámetros compartidos entre frames.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import torch
import torch.nn as nn

from Functions.DataIO.dataset import VideoDataset
from Functions.errors import MotionGeneratorError
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
from .cmg import clip_tokens, consistency_loss

logger = logging.getLogger(__name__)

STATE_KIND = "perframe"
HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss"]


class PerFrameMlp(nn.Module):
    def __init__(self, n_voxels: int, frames: int, tokens_per_frame: int, token_width: int,
                 hidden: int = 512):
        super().__init__()
        self.n_voxels = n_voxels
        self.frames = frames
        self.tokens_per_frame = tokens_per_frame
        self.token_width = token_width
        self.mlps = nn.ModuleList(
            nn.Sequential(nn.Linear(n_voxels, hidden), nn.GELU(),
                          nn.Linear(hidden, tokens_per_frame * token_width))
            for _ in range(frames - 1)
        )

    def forward(self, fmri: torch.Tensor) -> torch.Tensor:
        """B×V -> B×(n−1)×P×token_width (frames 2..n)."""
        outputs = [mlp(fmri).view(-1, self.tokens_per_frame, self.token_width) for mlp in self.mlps]
        return torch.stack(outputs, dim=1)


@dataclass
class PerFrameMlpState:
    model: PerFrameMlp
    config: Dict[str, Any]
    history: LossHistory = field(default_factory=lambda: LossHistory(HISTORY_COLUMNS))


def _build(config: Dict[str, Any]) -> PerFrameMlp:
    return PerFrameMlp(config["n_voxels"], config["frames"], config["tokens_per_frame"],
                       config["token_width"], config["hidden"])


def train_perframe(dataset: VideoDataset, tokenizer, config, seed: Optional[int] = None) -> PerFrameMlpState:
    """Entrena el baseline con el mismo presupuesto, lr y warmup que el CMG."""
    seed = config.seed if seed is None else seed
    patch = config.cmg_patch
    height, width = dataset.frame_size
    model_config = {
        "n_voxels": dataset.manifest.n_voxels, "frames": dataset.manifest.frames_per_clip,
        "tokens_per_frame": (height // patch) * (width // patch), "token_width": 3 * patch ** 2,
        "patch_size": patch, "frame_size": [height, width], "hidden": config.perframe_hidden,
    }
    generator = seeded_generator(seed)
    model = _build(model_config)
    state = PerFrameMlpState(model=model, config=model_config)

    train_idx, val_idx = split_train_val(len(dataset), config.val_fraction)
    fmri = torch.from_numpy(dataset.fmri)
    val_tokens = clip_tokens(dataset.frames[val_idx], tokenizer, patch)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.cmg_lr)
    scheduler = warmup_schedule(optimizer, config.cmg_warmup)
    guard = LossGuard(STATE_KIND, divergence_factor=config.divergence_factor)
    step = 0

    for epoch in progress(range(1, config.cmg_epochs + 1), "perframe", config.cmg_epochs):
        model.train()
        total, count = 0.0, 0
        for batch in iterate_batches(train_idx, config.cmg_batch, generator):
            tokens = clip_tokens(dataset.frames[batch], tokenizer, patch)
            loss = consistency_loss(model(fmri[batch]), tokens[:, 1:])
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
            val_loss = (float(consistency_loss(model(fmri[val_idx]), val_tokens[:, 1:]))
                        if len(val_idx) else float("nan"))
        state.history.append(epoch=epoch, train_loss=mean_loss(total, count), val_loss=val_loss)

    model.eval()
    logger.info("✅ Baseline por frame entrenado (%d MLPs)", len(model.mlps))
    return state


def predict_perframe(state: PerFrameMlpState, first_tokens: np.ndarray, fmri: np.ndarray) -> np.ndarray:
    """Frame 1 = first_tokens; frames 2..n desde los MLPs. Devuelve n×P×token_width."""
    fmri = np.asarray(fmri, dtype=np.float32)
    if fmri.shape[-1] != state.model.n_voxels:
        raise MotionGeneratorError(f"fMRI de {fmri.shape[-1]} voxels; el baseline espera {state.model.n_voxels}")
    state.model.eval()
    with torch.no_grad():
        rest = state.model(torch.from_numpy(fmri)[None])[0].numpy()
    return np.concatenate([np.asarray(first_tokens, dtype=np.float32)[None], rest], axis=0)


def save_perframe(state: PerFrameMlpState, directory: Union[str, Path],
                  meta: Optional[Dict[str, Any]] = None) -> Path:
    directory = Path(directory)
    save_module(directory, state.model, STATE_KIND, {"model_config": state.config, **(meta or {})})
    if len(state.history):
        state.history.write_csv(directory / "loss_history.csv")
    return directory


def load_perframe(directory: Union[str, Path]) -> PerFrameMlpState:
    meta, arrays = load_arrays_for(directory, STATE_KIND)
    model = load_module_arrays(_build(meta["model_config"]), arrays)
    model.eval()
    history_path = Path(directory) / "loss_history.csv"
    history = LossHistory.read_csv(history_path) if history_path.exists() else LossHistory(HISTORY_COLUMNS)
    return PerFrameMlpState(model=model, config=meta["model_config"], history=history)
