"""
Consistency Motion Generator (CMG).

Predice los tokens de los frames no vistos a partir de los m frames visibles
y del fMRI. Los frames futuros entran como un token placeholder aprendido
más su codificación posicional; las predicciones se leen en esas posiciones.
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
from Functions.errors import MotionGeneratorError
from Functions.Training import (
    LossGuard,
    LossHistory,
    load_arrays_for,
    load_module_arrays,
    iterate_batches,
    mean_loss,
    progress,
    save_module,
    seeded_generator,
    split_train_val,
    warmup_schedule,
)
from .layers import VARIANTS, CmgBlock, sinusoidal_encoding
from .masks import SparseCausalMask, build_mask, same_frame_mask

logger = logging.getLogger(__name__)

STATE_KIND = "cmg"
HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss"]


@dataclass(frozen=True)
class CmgConfig:
    n_voxels: int
    frames: int
    tokens_per_frame: int
    token_width: int
    patch_size: int
    frame_size: Tuple[int, int]
    layers: int = 4
    d_token: int = 128
    n_heads: int = 8
    mask_ratio: float = 0.6
    variant: str = "cross_attention"
    fmri_tokens: int = 8
    guided: bool = True

    def __post_init__(self):
        if self.d_token % self.n_heads:
            raise MotionGeneratorError(f"d_token={self.d_token} no es divisible por n_heads={self.n_heads}")
        if not 0.0 <= self.mask_ratio < 1.0:
            raise MotionGeneratorError(f"mask_ratio={self.mask_ratio} debe estar en [0, 1)")
        if self.variant not in VARIANTS:
            raise MotionGeneratorError(f"variant={self.variant!r} debe ser una de {VARIANTS}")
        if self.frames < 2:
            raise MotionGeneratorError(f"frames={self.frames} debe ser >= 2")

    def to_dict(self) -> Dict[str, Any]:
        data = dict(self.__dict__)
        data["frame_size"] = list(self.frame_size)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CmgConfig":
        data = dict(data)
        data["frame_size"] = tuple(data["frame_size"])
        return cls(**data)

    @classmethod
    def from_run_config(cls, config, n_voxels: int, frame_size: Tuple[int, int],
                        **overrides: Any) -> "CmgConfig":
        patch = config.cmg_patch
        values = dict(
            n_voxels=n_voxels, frames=config.frames_per_clip,
            tokens_per_frame=(frame_size[0] // patch) * (frame_size[1] // patch),
            token_width=3 * patch ** 2, patch_size=patch, frame_size=tuple(frame_size),
            layers=config.cmg_layers, d_token=config.cmg_d_token, n_heads=config.cmg_heads,
            mask_ratio=config.cmg_mask_ratio, variant=config.cmg_variant,
            fmri_tokens=config.cmg_fmri_tokens, guided=config.cmg_guidance,
        )
        values.update(overrides)
        return cls(**values)


class ConsistencyMotionGenerator(nn.Module):
    def __init__(self, config: CmgConfig):
        super().__init__()
        self.config = config
        d = config.d_token
        self.token_embed = nn.Linear(config.token_width, d)
        self.placeholder = nn.Parameter(torch.zeros(d))
        # E_pos: sinusoidal por índice de frame + offset aprendido por patch
        self.register_buffer("frame_pos", sinusoidal_encoding(config.frames, d))
        self.patch_pos = nn.Parameter(torch.zeros(config.tokens_per_frame, d))
        self.fmri_embed = nn.Linear(config.n_voxels, config.fmri_tokens * d)
        self.blocks = nn.ModuleList(
            CmgBlock(d, config.n_heads, config.variant, config.guided) for _ in range(config.layers)
        )
        self.head = nn.Linear(d, config.token_width)
        nn.init.normal_(self.placeholder, std=0.02)
        nn.init.normal_(self.patch_pos, std=0.02)

    def embed_fmri(self, fmri: torch.Tensor) -> torch.Tensor:
        """Emb(f): B×V -> B×fmri_tokens×d."""
        return self.fmri_embed(fmri).view(fmri.shape[0], self.config.fmri_tokens, self.config.d_token)

    def forward(self, visible: torch.Tensor, fmri: torch.Tensor, allowed: torch.Tensor,
                n_frames: Optional[int] = None) -> torch.Tensor:
        """
        Args:
            visible: B×m×P×token_width
            fmri: B×V
            allowed: máscara booleana (n·P)×(n·P)
            n_frames: Largo total n (por defecto config.frames)

        Returns:
            B×(n−m)×P×token_width
        """
        cfg = self.config
        n = cfg.frames if n_frames is None else n_frames
        batch, m, patches, _ = visible.shape
        future = self.placeholder.expand(batch, n - m, patches, cfg.d_token)
        z = torch.cat([self.token_embed(visible), future], dim=1)
        z = z + self.frame_pos[:n, None, :] + self.patch_pos[None, :, :]
        z = z.reshape(batch, n * patches, cfg.d_token)

        fmri_tokens = self.embed_fmri(fmri)
        same_frame = same_frame_mask(n, patches).to(z.device)
        for block in self.blocks:
            z = block(z, fmri_tokens, allowed, same_frame)

        out = self.head(z).view(batch, n, patches, cfg.token_width)
        return out[:, m:]


@dataclass
class CmgState:
    model: ConsistencyMotionGenerator
    config: CmgConfig
    history: LossHistory = field(default_factory=lambda: LossHistory(HISTORY_COLUMNS))


def consistency_loss(pred_tokens: torch.Tensor, true_tokens: torch.Tensor) -> torch.Tensor:
    """MSE sobre batch, frames m+1..n y tokens."""
    if pred_tokens.shape != true_tokens.shape:
        raise MotionGeneratorError(
            f"consistency_loss: formas distintas {tuple(pred_tokens.shape)} vs {tuple(true_tokens.shape)}"
        )
    return F.mse_loss(pred_tokens, true_tokens)


def _check_length(n: int, cfg: CmgConfig) -> None:
    if not 1 <= n <= cfg.frames:
        raise MotionGeneratorError(f"n={n} frames; la codificación posicional cubre 1..{cfg.frames}")


def _as_batch(tokens: torch.Tensor, fmri: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor, bool]:
    single = tokens.ndim == 3
    if single:
        tokens, fmri = tokens[None], fmri[None]
    return tokens, fmri, single


def cmg_forward(state: CmgState, visible_tokens, fmri, mask: Optional[SparseCausalMask] = None,
                n_frames: Optional[int] = None) -> torch.Tensor:
    """
    Predice los tokens de los frames m+1..n.

    Args:
        state: CmgState
        visible_tokens: m×P×token_width (o B×m×P×token_width)
        fmri: vector de voxels (o B×V)
        mask: SparseCausalMask sobre n frames (por defecto la de inferencia)
        n_frames: n (por defecto config.frames)

    Returns:
        (n−m)×P×token_width (o con dimensión de batch)
    """
    cfg = state.config
    n = cfg.frames if n_frames is None else n_frames
    visible = torch.as_tensor(visible_tokens, dtype=torch.float32) if not torch.is_tensor(visible_tokens) else visible_tokens
    fmri = torch.as_tensor(fmri, dtype=torch.float32) if not torch.is_tensor(fmri) else fmri
    visible, fmri, single = _as_batch(visible, fmri)

    m = visible.shape[1]
    if not 1 <= m < n:
        raise MotionGeneratorError(f"m={m} frames visibles; se requiere 1 <= m < n={n}")
    _check_length(n, cfg)
    if fmri.shape[-1] != cfg.n_voxels:
        raise MotionGeneratorError(f"fMRI de {fmri.shape[-1]} voxels; el CMG espera {cfg.n_voxels}")
    if tuple(visible.shape[2:]) != (cfg.tokens_per_frame, cfg.token_width):
        raise MotionGeneratorError(
            f"tokens con forma {tuple(visible.shape[2:])}; se esperaba {(cfg.tokens_per_frame, cfg.token_width)}"
        )
    if mask is None:
        mask = build_mask(n, cfg.tokens_per_frame, cfg.mask_ratio, mode="inference")
    if mask.frames != n:
        raise MotionGeneratorError(f"máscara de {mask.frames} frames para una secuencia de {n}")

    out = state.model(visible, fmri, mask.allowed, n_frames=n)
    return out[0] if single else out


def rollout_from_tokens(model: ConsistencyMotionGenerator, first_tokens: torch.Tensor,
                        fmri: torch.Tensor, n_frames: int) -> torch.Tensor:
    """
    Rollout autorregresivo con máscara de inferencia: frame 2 desde el 1,
    frame 3 desde 1-2, etc.

    Args:
        first_tokens: B×P×token_width
        fmri: B×V

    Returns:
        B×n×P×token_width (el frame 1 es first_tokens sin cambios)
    """
    cfg = model.config
    _check_length(n_frames, cfg)
    frames = [first_tokens]
    if n_frames <= 1:
        return first_tokens[:, None]
    allowed = build_mask(n_frames, cfg.tokens_per_frame, 0.0, mode="inference").allowed
    for _ in range(1, n_frames):
        visible = torch.stack(frames, dim=1)
        prediction = model(visible, fmri, allowed, n_frames=n_frames)
        frames.append(prediction[:, 0])
    return torch.stack(frames, dim=1)


def generate_motion(state: CmgState, first_frame_latent: np.ndarray, fmri: np.ndarray, tokenizer,
                    n_frames: Optional[int] = None) -> np.ndarray:
    """
    Secuencia completa de tokens (n×P×token_width) a partir del latente del
    primer frame (salida del decodificador estructural) y del fMRI.
    """
    cfg = state.config
    n = cfg.frames if n_frames is None else n_frames
    _check_length(n, cfg)
    first_tokens = np.asarray(tokenizer.tokenize(first_frame_latent, cfg.patch_size), dtype=np.float32)
    if n == 1:
        return first_tokens[None]
    fmri = np.asarray(fmri, dtype=np.float32)
    if fmri.shape[-1] != cfg.n_voxels:
        raise MotionGeneratorError(f"fMRI de {fmri.shape[-1]} voxels; el CMG espera {cfg.n_voxels}")
    state.model.eval()
    with torch.no_grad():
        tokens = rollout_from_tokens(state.model, torch.from_numpy(first_tokens)[None],
                                     torch.from_numpy(fmri)[None], n)
    return tokens[0].numpy()


def clip_tokens(frames: np.ndarray, tokenizer, patch_size: int) -> torch.Tensor:
    """B×f×3×H×W -> B×f×P×token_width."""
    return torch.from_numpy(np.ascontiguousarray(tokenizer.frames_to_tokens(frames, patch_size), dtype=np.float32))


def rollout_validation_loss(model: ConsistencyMotionGenerator, tokens: torch.Tensor,
                            fmri: torch.Tensor) -> float:
    """consistency_loss del rollout desde el frame 1 verdadero."""
    if tokens.shape[0] == 0:
        return float("nan")
    model.eval()
    with torch.no_grad():
        rollout = rollout_from_tokens(model, tokens[:, 0], fmri, tokens.shape[1])
        return float(consistency_loss(rollout[:, 1:], tokens[:, 1:]))


def train_cmg(dataset: VideoDataset, tokenizer, config, seed: Optional[int] = None,
              **overrides: Any) -> CmgState:
    """
    Entrena el CMG por predicción de frames siguientes.

    Por batch se sortea m ∈ {1..n−1} y una máscara aleatoria nueva. Aborta si
    la pérdida supera divergence_factor × la pérdida inicial.

    Args:
        dataset: Split de entrenamiento
        tokenizer: Backend tokenizer
        config: RunConfig
        seed: Semilla (por defecto config.seed)
        **overrides: Campos de CmgConfig a forzar (guided=False, variant=...)

    Returns:
        CmgState con historial (epoch, train_loss, val_loss)
    """
    seed = config.seed if seed is None else seed
    cmg_config = CmgConfig.from_run_config(config, dataset.manifest.n_voxels, dataset.frame_size, **overrides)
    generator = seeded_generator(seed)
    model = ConsistencyMotionGenerator(cmg_config)
    state = CmgState(model=model, config=cmg_config)

    n = cmg_config.frames
    train_idx, val_idx = split_train_val(len(dataset), config.val_fraction)
    fmri = torch.from_numpy(dataset.fmri)
    val_tokens = clip_tokens(dataset.frames[val_idx], tokenizer, cmg_config.patch_size)

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.cmg_lr)
    scheduler = warmup_schedule(optimizer, config.cmg_warmup)
    guard = LossGuard(STATE_KIND, divergence_factor=config.divergence_factor)
    step = 0
    logger.info("📊 Entrenamiento CMG (%s, guía fMRI=%s): %d épocas",
                cmg_config.variant, cmg_config.guided, config.cmg_epochs)

    for epoch in progress(range(1, config.cmg_epochs + 1), "cmg", config.cmg_epochs):
        model.train()
        total, count = 0.0, 0
        for batch in iterate_batches(train_idx, config.cmg_batch, generator):
            tokens = clip_tokens(dataset.frames[batch], tokenizer, cmg_config.patch_size)
            m = int(torch.randint(1, n, (1,), generator=generator))
            mask = build_mask(n, cmg_config.tokens_per_frame, cmg_config.mask_ratio, "train", generator=generator)
            prediction = model(tokens[:, :m], fmri[batch], mask.allowed, n_frames=n)
            loss = consistency_loss(prediction, tokens[:, m:])
            guard.check(loss.item(), epoch, step)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            scheduler.step()
            step += 1
            total += loss.item() * len(batch)
            count += len(batch)

        val_loss = rollout_validation_loss(model, val_tokens, fmri[val_idx])
        state.history.append(epoch=epoch, train_loss=mean_loss(total, count), val_loss=val_loss)

    model.eval()
    logger.info("✅ CMG entrenado (%d pasos)", step)
    return state


def save_cmg(state: CmgState, directory: Union[str, Path], meta: Optional[Dict[str, Any]] = None) -> Path:
    directory = Path(directory)
    save_module(directory, state.model, STATE_KIND, {"model_config": state.config.to_dict(), **(meta or {})})
    if len(state.history):
        state.history.write_csv(directory / "loss_history.csv")
    return directory


def load_cmg(directory: Union[str, Path]) -> CmgState:
    meta, arrays = load_arrays_for(directory, STATE_KIND)
    config = CmgConfig.from_dict(meta["model_config"])
    model = load_module_arrays(ConsistencyMotionGenerator(config), arrays)
    model.eval()
    history_path = Path(directory) / "loss_history.csv"
    history = LossHistory.read_csv(history_path) if history_path.exists() else LossHistory(HISTORY_COLUMNS)
    return CmgState(model=model, config=config, history=history)
