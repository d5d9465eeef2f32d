"""
Generador sintético video-fMRI con acoplamiento conocido.

Cada muestra es una figura de color (cuadrado, círculo o rombo) que se
traslada con velocidad constante. El fMRI es una imagen lineal del
descriptor latente: fmri = W_true · descriptor + ruido.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
from einops import reduce

from Functions.Encoders.vocabulary import (
    COLOR_NAMES,
    PALETTE,
    SHAPES,
    SIZE_NAMES,
    SIZES_PX,
    direction_word,
)
from Functions.errors import DatasetError
from .captions import caption_similarities, pair_captions
from .dataset import DatasetManifest, VideoDataset, frames_from_u8, frames_to_u8, write_dataset

logger = logging.getLogger(__name__)

SUPERSAMPLING = 4
# [forma one-hot (3) | tamaño | centro0 (2) | velocidad (2) | color RGB (3)]
DESCRIPTOR_SIZE = 11
SPLIT_CODES = {"train": 0, "test": 1}
_W_STREAM = 99
_CAPTION_STREAM = 7


@dataclass(frozen=True)
class SyntheticConfig:
    n_samples: int
    n_voxels: int = 512
    frames_per_clip: int = 8
    frame_size: Tuple[int, int] = (64, 64)
    noise: float = 0.1
    max_speed: float = 2.0
    n_signal_voxels: int = 0
    repetitions: int = 2
    seed: int = 0
    split: str = "train"
    frame_hz: float = 4.0
    tr_seconds: float = 2.0
    lag_seconds: float = 4.0
    caption_threshold: float = 0.05
    name: str = "synthetic"

    @classmethod
    def from_run_config(cls, config, split: str) -> "SyntheticConfig":
        """Construye la configuración de un split a partir de un RunConfig."""
        return cls(
            n_samples=config.synth_n_train if split == "train" else config.synth_n_test,
            n_voxels=config.synth_n_voxels, frames_per_clip=config.frames_per_clip,
            frame_size=(config.synth_height, config.synth_width), noise=config.synth_noise,
            max_speed=config.synth_max_speed, n_signal_voxels=config.synth_n_signal_voxels,
            repetitions=config.synth_repetitions, seed=config.seed, split=split,
            frame_hz=config.frame_hz, tr_seconds=config.tr_seconds,
            lag_seconds=config.lag_seconds, caption_threshold=config.caption_threshold,
        )


def _check_config(config: SyntheticConfig) -> None:
    height, width = config.frame_size
    problems = []
    if config.n_samples < 1:
        problems.append(f"n_samples={config.n_samples}")
    if config.n_voxels < 1:
        problems.append(f"n_voxels={config.n_voxels}")
    if config.frames_per_clip < 2:
        problems.append(f"frames_per_clip={config.frames_per_clip}")
    if config.repetitions < 1:
        problems.append(f"repetitions={config.repetitions}")
    if config.split not in SPLIT_CODES:
        problems.append(f"split={config.split!r}")
    if not 0 <= config.n_signal_voxels <= config.n_voxels:
        problems.append(f"n_signal_voxels={config.n_signal_voxels}")
    if config.noise < 0 or config.max_speed < 0:
        problems.append("noise y max_speed no pueden ser negativos")
    travel = max(SIZES_PX) + (config.frames_per_clip - 1) * config.max_speed
    if height % 8 or width % 8 or min(height, width) < travel:
        problems.append(f"frame_size={config.frame_size} (múltiplo de 8 y >= {travel:.1f} px)")
    if problems:
        raise DatasetError("Configuración sintética degenerada: " + ", ".join(problems))


def render_shape(shape: str, size_px: float, color: Tuple[float, float, float],
                 center: Tuple[float, float], frame_size: Tuple[int, int]) -> np.ndarray:
    """
    Dibuja una figura con anti-aliasing (supersampling 4×4).

    Args:
        center: (cx, cy) en píxeles; el píxel i cubre [i, i+1)

    Returns:
        Frame 3×H×W en [0,1]
    """
    height, width = frame_size
    ys = (np.arange(height * SUPERSAMPLING) + 0.5) / SUPERSAMPLING
    xs = (np.arange(width * SUPERSAMPLING) + 0.5) / SUPERSAMPLING
    dx = xs[None, :] - center[0]
    dy = ys[:, None] - center[1]
    half = size_px / 2.0
    if shape == "square":
        inside = (np.abs(dx) <= half) & (np.abs(dy) <= half)
    elif shape == "circle":
        inside = dx ** 2 + dy ** 2 <= half ** 2
    elif shape == "diamond":
        inside = np.abs(dx) + np.abs(dy) <= half
    else:
        raise DatasetError(f"Forma desconocida {shape!r}; formas: {SHAPES}")
    coverage = reduce(inside.astype(np.float64), "(h a) (w b) -> h w", "mean",
                      a=SUPERSAMPLING, b=SUPERSAMPLING)
    return np.asarray(color, dtype=np.float64)[:, None, None] * coverage[None]


def _start_range(extent: float, half: float, travel: float) -> Tuple[float, float]:
    """Rango de centros iniciales que mantiene la trayectoria dentro del frame."""
    return half - min(0.0, travel), extent - half - max(0.0, travel)


def shape_descriptor(shape: str, size_px: float, center0, velocity, color: Tuple[float, float, float],
                     frame_size: Tuple[int, int], max_speed: float) -> np.ndarray:
    """Descriptor latente de 11 componentes de una figura (centro en px, velocidad en px/frame)."""
    if shape not in SHAPES:
        raise DatasetError(f"Forma desconocida {shape!r}; formas: {SHAPES}")
    height, width = frame_size
    descriptor = np.zeros(DESCRIPTOR_SIZE)
    descriptor[SHAPES.index(shape)] = 1.0
    descriptor[3] = size_px / max(SIZES_PX)
    descriptor[4:6] = np.asarray(center0, dtype=float) / np.array([width, height]) * 2.0 - 1.0
    descriptor[6:8] = np.asarray(velocity, dtype=float) / max_speed if max_speed > 0 else 0.0
    descriptor[8:11] = color
    return descriptor


def true_weights(config: SyntheticConfig) -> Tuple[np.ndarray, np.ndarray]:
    """W_true (V×11) y los voxels con señal; dependen solo de la semilla, no del split."""
    rng = np.random.default_rng([config.seed, _W_STREAM])
    weights = rng.standard_normal((config.n_voxels, DESCRIPTOR_SIZE))
    signal = np.arange(config.n_voxels, dtype=np.int64)
    if config.n_signal_voxels:
        signal = np.sort(rng.choice(config.n_voxels, config.n_signal_voxels, replace=False)).astype(np.int64)
        silent = np.setdiff1d(np.arange(config.n_voxels), signal)
        weights[silent] = 0.0
    return weights, signal


def generate_synthetic_dataset(config: SyntheticConfig, embedder=None,
                               directory: Optional[Union[str, Path]] = None) -> VideoDataset:
    """
    Genera un split sintético (y lo escribe si se indica un directorio).

    Regenerar con la misma semilla produce un dataset idéntico byte a byte.

    Args:
        config: SyntheticConfig
        embedder: Backend de embedding para la regla de captions (toy por defecto)
        directory: Directorio destino opcional

    Returns:
        VideoDataset con ground truth (descriptores, velocidades, W_true, ...)
    """
    _check_config(config)
    if embedder is None:
        from Functions.Encoders.registry import get_backend
        embedder = get_backend("embedder", "toy")

    height, width = config.frame_size
    n, f = config.n_samples, config.frames_per_clip
    rng = np.random.default_rng([config.seed, SPLIT_CODES[config.split]])
    caption_rng = np.random.default_rng([config.seed, SPLIT_CODES[config.split], _CAPTION_STREAM])
    weights, signal = true_weights(config)

    frames_u8 = np.zeros((n, f, 3, height, width), dtype=np.uint8)
    descriptors = np.zeros((n, DESCRIPTOR_SIZE))
    velocities = np.zeros((n, 2))
    centers = np.zeros((n, 2))
    attributes = np.zeros((n, 3), dtype=np.int64)
    captions = []

    for i in range(n):
        shape_idx, size_idx = int(rng.integers(len(SHAPES))), int(rng.integers(len(SIZES_PX)))
        color_idx = int(rng.integers(len(COLOR_NAMES)))
        velocity = rng.uniform(-config.max_speed, config.max_speed, size=2)
        size_px = SIZES_PX[size_idx]
        center0 = np.array([
            rng.uniform(*_start_range(width, size_px / 2.0, (f - 1) * velocity[0])),
            rng.uniform(*_start_range(height, size_px / 2.0, (f - 1) * velocity[1])),
        ])
        color = PALETTE[COLOR_NAMES[color_idx]]
        for j in range(f):
            frame = render_shape(SHAPES[shape_idx], size_px, color, tuple(center0 + j * velocity), (height, width))
            frames_u8[i, j] = frames_to_u8(frame)

        descriptors[i] = shape_descriptor(SHAPES[shape_idx], size_px, center0, velocity, color,
                                          config.frame_size, config.max_speed)
        velocities[i], centers[i] = velocity, center0
        attributes[i] = (color_idx, shape_idx, size_idx)

        noun = f"a {SIZE_NAMES[size_idx]} {COLOR_NAMES[color_idx]} {SHAPES[shape_idx]}"
        caption_first, caption_mid = noun, f"{noun} moving {direction_word(tuple(velocity))}"
        middle = frames_from_u8(frames_u8[i, f // 2])
        sims = caption_similarities(embedder, caption_first, caption_mid, middle)
        captions.append(pair_captions(caption_first, caption_mid, *sims,
                                      threshold=config.caption_threshold, rng=caption_rng))

    clean = descriptors @ weights.T
    repetitions = np.stack([
        clean + config.noise * rng.standard_normal((n, config.n_voxels))
        for _ in range(config.repetitions)
    ])
    fmri = clean if config.noise == 0 else repetitions.mean(axis=0)

    manifest = DatasetManifest(
        name=config.name, split=config.split, n_samples=n, n_voxels=config.n_voxels,
        frames_per_clip=f, frame_hz=config.frame_hz, frame_size=(height, width),
        lag_seconds=config.lag_seconds, tr_seconds=config.tr_seconds,
    )
    ground_truth = {
        "descriptors": descriptors.astype(np.float32),
        "velocities": velocities.astype(np.float32),
        "centers": centers.astype(np.float32),
        "attributes": attributes,
        "w_true": weights.astype(np.float32),
        "signal_voxels": signal,
        "repetitions": repetitions.astype(np.float32),
    }
    dataset = VideoDataset(manifest, fmri.astype(np.float32), frames_from_u8(frames_u8), captions, ground_truth)
    logger.info("✅ Dataset sintético %s: %d clips, %d voxels, ruido %.3f",
                config.split, n, config.n_voxels, config.noise)
    if directory is not None:
        write_dataset(dataset, directory)
    return dataset
