"""
Aumentaciones del entrenamiento semántico: voxels, texto (EDA) y frames.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import torch
from skimage.transform import resize

from Functions.errors import DecoderError

logger = logging.getLogger(__name__)

DEFAULT_SYNONYMS_PATH = Path(__file__).parent.parent.parent / "DataBase" / "Inputs" / "synonyms.json"


@dataclass(frozen=True)
class AugmentationPolicy:
    voxel_subset_fraction: float = 0.20
    voxel_zero_fraction: float = 0.50
    synonym: float = 0.5
    insert: float = 0.2
    swap: float = 0.2
    delete: float = 0.2
    crop_fraction: float = 400.0 / 512.0

    def __post_init__(self):
        for name in ("voxel_subset_fraction", "voxel_zero_fraction", "synonym", "insert", "swap", "delete"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise DecoderError(f"{name}={value} debe estar en [0, 1]")
        if not 0.0 < self.crop_fraction <= 1.0:
            raise DecoderError(f"crop_fraction={self.crop_fraction} debe estar en (0, 1]")

    @classmethod
    def from_run_config(cls, config) -> "AugmentationPolicy":
        return cls(
            voxel_subset_fraction=config.aug_voxel_subset, voxel_zero_fraction=config.aug_voxel_zero,
            synonym=config.aug_synonym, insert=config.aug_insert, swap=config.aug_swap,
            delete=config.aug_delete, crop_fraction=config.aug_crop_fraction,
        )

    @classmethod
    def disabled(cls) -> "AugmentationPolicy":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)


def augment_voxels(x: torch.Tensor, policy: AugmentationPolicy,
                   generator: Optional[torch.Generator] = None) -> torch.Tensor:
    """
    Elige un subconjunto de voxels (fracción voxel_subset_fraction) y pone a
    cero una fracción voxel_zero_fraction de ellos, por muestra.
    """
    subset = torch.rand(x.shape, generator=generator) < policy.voxel_subset_fraction
    zeroed = subset & (torch.rand(x.shape, generator=generator) < policy.voxel_zero_fraction)
    return x.masked_fill(zeroed, 0.0)


def load_synonyms(path: Optional[Union[str, Path]] = None) -> Dict[str, List[str]]:
    """Tabla de sinónimos palabra -> lista (JSON)."""
    path = Path(path) if path else DEFAULT_SYNONYMS_PATH
    if not path.exists():
        raise DecoderError(f"Tabla de sinónimos no encontrada: {path}")
    with open(path, "r", encoding="utf-8") as f:
        table = json.load(f)
    logger.debug("📂 %d entradas de sinónimos desde %s", len(table), path)
    return {word.lower(): list(options) for word, options in table.items()}


def augment_text(text: str, policy: AugmentationPolicy, synonyms: Dict[str, List[str]],
                 rng: np.random.Generator) -> str:
    """
    EDA sobre tokens separados por espacios: reemplazo por sinónimo, inserción,
    intercambio y borrado, cada operación con su probabilidad. Nunca devuelve
    un texto vacío.
    """
    words = text.split()
    if not words:
        return text

    def with_synonyms() -> List[int]:
        return [i for i, word in enumerate(words) if word.lower().strip(",") in synonyms]

    if rng.random() < policy.synonym:
        candidates = with_synonyms()
        if candidates:
            i = candidates[rng.integers(len(candidates))]
            options = synonyms[words[i].lower().strip(",")]
            words[i] = options[rng.integers(len(options))]
    if rng.random() < policy.insert:
        candidates = with_synonyms()
        if candidates:
            options = synonyms[words[candidates[rng.integers(len(candidates))]].lower().strip(",")]
            words.insert(int(rng.integers(len(words) + 1)), options[rng.integers(len(options))])
    if rng.random() < policy.swap and len(words) >= 2:
        i, j = rng.choice(len(words), size=2, replace=False)
        words[i], words[j] = words[j], words[i]
    if rng.random() < policy.delete and len(words) >= 2:
        del words[int(rng.integers(len(words)))]
    return " ".join(words)


def random_crop_resize(frame: np.ndarray, crop_fraction: float, rng: np.random.Generator) -> np.ndarray:
    """Recorte cuadrado aleatorio de lado crop_fraction·min(H, W), redimensionado a H×W."""
    _, height, width = frame.shape
    side = max(1, int(round(crop_fraction * min(height, width))))
    if side >= min(height, width):
        return frame
    top = int(rng.integers(height - side + 1))
    left = int(rng.integers(width - side + 1))
    crop = frame[:, top:top + side, left:left + side]
    resized = resize(crop, (3, height, width), order=1, mode="edge", anti_aliasing=False)
    return np.clip(resized, 0.0, 1.0).astype(np.float32)


def augmented_frame(clip: np.ndarray, policy: AugmentationPolicy, rng: np.random.Generator) -> np.ndarray:
    """Un frame al azar del clip, recortado y redimensionado."""
    frame = clip[int(rng.integers(clip.shape[0]))]
    return random_crop_resize(frame, policy.crop_fraction, rng)
