"""
Decodificador semántico: fMRI -> embedding unitario f (d_e = 512) y
condición de texto c (20×768).

El tronco es un perceptrón de tres capas; la cabeza, de dos capas, lleva f a
la condición. La temperatura se aprende en escala logarítmica (tau > 0).
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from Functions.DataIO.dataset import VideoDataset
from Functions.Encoders.interfaces import CONDITION_SHAPE, EMBED_DIM
from Functions.Evaluation.retrieval import retrieval_ranks
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
)
from .augmentation import AugmentationPolicy, augment_text, augment_voxels, augmented_frame, load_synonyms
from .losses import combined_loss, combined_loss_terms

logger = logging.getLogger(__name__)

STATE_KIND = "semantic"
HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "val_top1"]


class SemanticDecoder(nn.Module):
    def __init__(self, n_voxels: int, hidden: int = 1024, head_hidden: int = 1024,
                 embed_dim: int = EMBED_DIM, condition_shape: Tuple[int, int] = CONDITION_SHAPE,
                 tau_init: float = 0.07, dropout: float = 0.1):
        super().__init__()
        self.n_voxels = n_voxels
        self.condition_shape = tuple(condition_shape)
        self.trunk = nn.Sequential(
            nn.Linear(n_voxels, hidden), nn.GELU(), nn.Dropout(dropout),
            nn.Linear(hidden, hidden), nn.GELU(), nn.Dropout(dropout),
            nn.Linear(hidden, embed_dim),
        )
        self.head = nn.Sequential(
            nn.Linear(embed_dim, head_hidden), nn.GELU(),
            nn.Linear(head_hidden, condition_shape[0] * condition_shape[1]),
        )
        self.log_tau = nn.Parameter(torch.tensor(math.log(tau_init)))

    @property
    def tau(self) -> torch.Tensor:
        return self.log_tau.exp()

    def forward(self, x: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        f = F.normalize(self.trunk(x), dim=-1)
        c = self.head(f).view(-1, *self.condition_shape)
        return f, c


@dataclass
class SemanticDecoderState:
    model: SemanticDecoder
    config: Dict[str, Any]
    history: LossHistory = field(default_factory=lambda: LossHistory(HISTORY_COLUMNS))

    @property
    def n_voxels(self) -> int:
        return self.model.n_voxels


def _model_config(config, n_voxels: int) -> Dict[str, Any]:
    return {
        "n_voxels": n_voxels, "hidden": config.semantic_hidden, "head_hidden": config.head_hidden,
        "tau_init": config.tau_init, "alpha": config.alpha, "lambda1": config.lambda1,
        "lambda2": config.lambda2,
    }


def build_semantic_decoder(model_config: Dict[str, Any]) -> SemanticDecoder:
    return SemanticDecoder(model_config["n_voxels"], hidden=model_config["hidden"],
                           head_hidden=model_config["head_hidden"], tau_init=model_config["tau_init"])


def _topk1(f: np.ndarray, candidates: np.ndarray) -> float:
    """Top-1 de recuperación f -> candidato correcto (mismo índice), misma regla de empates que retrieval."""
    return float(np.mean(retrieval_ranks(f, candidates) == 0))


def train_semantic(dataset: VideoDataset, config, embedder, conditioner,
                   augmentation: Optional[AugmentationPolicy] = None, seed: Optional[int] = None,
                   synonyms: Optional[Dict[str, Sequence[str]]] = None) -> SemanticDecoderState:
    """
    Entrena el decodificador semántico minimizando combined_loss.

    Args:
        dataset: Split de entrenamiento (el último val_fraction se usa como validación)
        config: RunConfig (alpha, lambdas, lr, épocas, batch, tamaños ocultos)
        embedder: Backend de embedding (texto, imagen, video)
        conditioner: Backend de condición de texto
        augmentation: Política de aumentación (por defecto la de config)
        seed: Semilla (por defecto config.seed)
        synonyms: Tabla de sinónimos (por defecto DataBase/Inputs/synonyms.json)

    Returns:
        SemanticDecoderState con historial por época (train_loss, val_loss, val_top1)
    """
    seed = config.seed if seed is None else seed
    augmentation = augmentation or AugmentationPolicy.from_run_config(config)
    if synonyms is None:
        synonyms = load_synonyms()
    if any(not caption for caption in dataset.captions):
        raise DecoderError("train_semantic requiere un caption por clip")

    generator = seeded_generator(seed)
    rng = np.random.default_rng(seed)
    model_config = _model_config(config, dataset.manifest.n_voxels)
    model = build_semantic_decoder(model_config)
    state = SemanticDecoderState(model=model, config=model_config)

    train_idx, val_idx = split_train_val(len(dataset), config.val_fraction)
    fmri = torch.from_numpy(dataset.fmri)
    c_true_all = torch.from_numpy(conditioner.condition_batch(dataset.captions))
    val_t = torch.from_numpy(embedder.embed_texts([dataset.captions[i] for i in val_idx]))
    val_v = torch.from_numpy(embedder.embed_videos(dataset.frames[val_idx]))

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.semantic_lr)
    guard = LossGuard(STATE_KIND, divergence_factor=config.divergence_factor)
    step = 0
    logger.info("📊 Entrenamiento semántico: %d train / %d val, %d épocas",
                len(train_idx), len(val_idx), config.semantic_epochs)

    for epoch in progress(range(1, config.semantic_epochs + 1), "semantic", config.semantic_epochs):
        model.train()
        total, count = 0.0, 0
        for batch in iterate_batches(train_idx, config.semantic_batch, generator):
            x = augment_voxels(fmri[batch], augmentation, generator)
            t = torch.from_numpy(embedder.embed_texts(
                [augment_text(dataset.captions[i], augmentation, synonyms, rng) for i in batch]))
            v = torch.from_numpy(np.stack([
                embedder.embed_image(augmented_frame(dataset.frames[i], augmentation, rng)) for i in batch]))
            f, c_pred = model(x)
            loss = combined_loss(f, t, c_pred, c_true_all[batch], config.lambda1, config.lambda2,
                                 config.alpha, v, model.tau)
            guard.check(loss.item(), epoch, step)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            step += 1
            total += loss.item() * len(batch)
            count += len(batch)

        val_loss, val_top1 = _validate(model, fmri[val_idx], val_t, c_true_all[val_idx], val_v, config)
        state.history.append(epoch=epoch, train_loss=mean_loss(total, count), val_loss=val_loss, val_top1=val_top1)
        logger.debug("📊 semantic época %d: train %.5f val %.5f top1 %.3f",
                     epoch, mean_loss(total, count), val_loss, val_top1)

    model.eval()
    logger.info("✅ Decodificador semántico entrenado (tau=%.4f)", float(model.tau))
    return state


def _validate(model: SemanticDecoder, x: torch.Tensor, t: torch.Tensor, c_true: torch.Tensor,
              v: torch.Tensor, config) -> Tuple[float, float]:
    if x.shape[0] == 0:
        return float("nan"), float("nan")
    model.eval()
    with torch.no_grad():
        f, c_pred = model(x)
        terms = combined_loss_terms(f, t, c_pred, c_true, config.lambda1, config.lambda2,
                                    config.alpha, v, model.tau)
    return float(terms["total"]), _topk1(f.numpy(), v.numpy())


def decode_semantic(state: SemanticDecoderState, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    fMRI -> (f unitario, c 20×768). Acepta un vector (V,) o un batch (N×V).
    """
    x = np.asarray(x, dtype=np.float32)
    single = x.ndim == 1
    batch = x[None] if single else x
    if batch.ndim != 2 or batch.shape[1] != state.n_voxels:
        raise DecoderError(f"Vector de {batch.shape[-1]} voxels; el decodificador espera {state.n_voxels}")
    state.model.eval()
    with torch.no_grad():
        f, c = state.model(torch.from_numpy(batch))
    f, c = f.numpy(), c.numpy()
    return (f[0], c[0]) if single else (f, c)


def save_semantic(state: SemanticDecoderState, directory: Union[str, Path],
                  meta: Optional[Dict[str, Any]] = None) -> Path:
    directory = Path(directory)
    save_module(directory, state.model, STATE_KIND, {"model_config": state.config, **(meta or {})})
    if len(state.history):
        state.history.write_csv(directory / "loss_history.csv")
    return directory


def load_semantic(directory: Union[str, Path]) -> SemanticDecoderState:
    meta, arrays = load_arrays_for(directory, STATE_KIND)
    model = load_module_arrays(build_semantic_decoder(meta["model_config"]), arrays)
    model.eval()
    history_path = Path(directory) / "loss_history.csv"
    history = LossHistory.read_csv(history_path) if history_path.exists() else LossHistory(HISTORY_COLUMNS)
    return SemanticDecoderState(model=model, config=meta["model_config"], history=history)
