"""
Preparación de los splits: selección de voxels sobre las repeticiones de
entrenamiento y z-score con estadísticas del split de entrenamiento.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple, Union

import numpy as np

from .array_store import read_arrays, write_arrays
from .dataset import VideoDataset, read_dataset, write_dataset
from .preprocessing import VoxelSelection, apply_zscore, fit_zscore, select_voxels

logger = logging.getLogger(__name__)

PREPROCESSING_DIR = "preprocessing"


@dataclass(frozen=True)
class Preparation:
    """Lo aplicado a ambos splits: voxels conservados y estadísticas z-score."""

    kept_indices: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    scores: np.ndarray

    def apply(self, fmri: np.ndarray) -> np.ndarray:
        return apply_zscore(np.asarray(fmri)[:, self.kept_indices], self.mean, self.std)


def _remap_ground_truth(dataset: VideoDataset, kept: np.ndarray) -> Dict[str, np.ndarray]:
    """Recorta W_true, repeticiones y voxels de señal al subconjunto conservado."""
    gt = dict(dataset.ground_truth)
    if "w_true" in gt:
        gt["w_true"] = gt["w_true"][kept]
    if "repetitions" in gt:
        gt["repetitions"] = gt["repetitions"][:, :, kept]
    if "signal_voxels" in gt:
        position = {int(v): i for i, v in enumerate(kept)}
        gt["signal_voxels"] = np.array(
            [position[int(v)] for v in gt["signal_voxels"] if int(v) in position], dtype=np.int64
        )
    return gt


def prepare_dataset(train: VideoDataset, test: VideoDataset,
                    voxel_k: int) -> Tuple[VideoDataset, VideoDataset, Preparation]:
    """
    Selecciona voxels (si hay repeticiones y k < V) y aplica z-score.

    Returns:
        (train preparado, test preparado, Preparation)
    """
    n_voxels = train.manifest.n_voxels
    repetitions = train.ground_truth.get("repetitions")
    if repetitions is not None and repetitions.shape[0] >= 2 and voxel_k < n_voxels:
        # pares de repeticiones (0,1), (2,3), ... como sesiones
        n_pairs = repetitions.shape[0] // 2
        selection = select_voxels(repetitions[0:2 * n_pairs:2], repetitions[1:2 * n_pairs:2], voxel_k)
    else:
        if voxel_k < n_voxels:
            logger.warning("⚠️ Sin repeticiones: se conservan los primeros %d voxels", voxel_k)
        kept = np.arange(min(voxel_k, n_voxels), dtype=np.int64)
        selection = VoxelSelection(kept_indices=kept, scores=np.zeros(n_voxels), k=voxel_k)

    kept = selection.kept_indices
    mean, std = fit_zscore(train.fmri[:, kept])
    preparation = Preparation(kept_indices=kept, mean=mean, std=std, scores=selection.scores)

    prepared_train = train.with_fmri(preparation.apply(train.fmri), _remap_ground_truth(train, kept))
    prepared_test = test.with_fmri(preparation.apply(test.fmri), _remap_ground_truth(test, kept))
    logger.info("✅ Preparación: %d -> %d voxels, z-score con estadísticas de entrenamiento",
                n_voxels, kept.size)
    return prepared_train, prepared_test, preparation


def write_prepared(directory: Union[str, Path], train: VideoDataset, test: VideoDataset,
                   preparation: Preparation) -> Path:
    directory = Path(directory)
    write_dataset(train, directory / "train")
    write_dataset(test, directory / "test")
    # scores puede contener -inf: se guardan aparte como máscara + valores finitos
    finite = np.isfinite(preparation.scores)
    write_arrays(directory / PREPROCESSING_DIR, {
        "kept_indices": preparation.kept_indices,
        "mean": preparation.mean,
        "std": preparation.std,
        "scores": np.where(finite, preparation.scores, 0.0).astype(np.float32),
        "scores_finite": finite,
    })
    return directory


def read_prepared(directory: Union[str, Path]) -> Tuple[VideoDataset, VideoDataset, Preparation]:
    directory = Path(directory)
    _, arrays = read_arrays(directory / PREPROCESSING_DIR)
    scores = np.where(arrays["scores_finite"].astype(bool), arrays["scores"], -np.inf)
    preparation = Preparation(arrays["kept_indices"], arrays["mean"], arrays["std"], scores)
    return read_dataset(directory / "train"), read_dataset(directory / "test"), preparation
