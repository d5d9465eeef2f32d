"""
Preprocesamiento: segmentación de video en clips, selección de voxels
reproducibles, retardo hemodinámico y z-score por voxel.
"""

import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from skimage.transform import resize

from Functions.errors import DatasetError
from .dataset import VideoClip

logger = logging.getLogger(__name__)

# correlación máxima antes de Fisher-z (r = ±1 daría infinito)
R_CLIP = 1.0 - 1e-7


@dataclass(frozen=True)
class VoxelSelection:
    kept_indices: np.ndarray
    scores: np.ndarray
    k: int


def _center_crop_resize(frame: np.ndarray, out_size: Tuple[int, int]) -> np.ndarray:
    """Recorte cuadrado central (3×H×W) y resize a out_size."""
    _, height, width = frame.shape
    side = min(height, width)
    top, left = (height - side) // 2, (width - side) // 2
    crop = frame[:, top:top + side, left:left + side]
    if crop.shape[1:] == tuple(out_size):
        return crop.astype(np.float32)
    resized = resize(crop, (3, *out_size), order=1, mode="edge", anti_aliasing=True)
    return np.clip(resized, 0.0, 1.0).astype(np.float32)


def segment_and_downsample(raw_frames: np.ndarray, native_fps: float, clip_seconds: float,
                           target_hz: float, out_size: Tuple[int, int]) -> List[VideoClip]:
    """
    Corta un video en clips consecutivos de clip_seconds y los muestrea a target_hz.

    Args:
        raw_frames: T×3×H×W en [0,1] (o uint8)
        native_fps: fps del video original
        clip_seconds: duración de cada clip
        target_hz: frecuencia de muestreo de salida
        out_size: (H, W) de salida, tras recorte central

    Returns:
        Lista de VideoClip de clip_seconds·target_hz frames cada uno
    """
    if target_hz <= 0:
        raise DatasetError(f"target_hz={target_hz} debe ser positivo")
    if native_fps < target_hz:
        raise DatasetError(f"native_fps={native_fps} es menor que target_hz={target_hz}")
    frames_per_clip = clip_seconds * target_hz
    if frames_per_clip < 1 or abs(frames_per_clip - round(frames_per_clip)) > 1e-9:
        raise DatasetError(f"clip_seconds·target_hz = {frames_per_clip} debe ser un entero >= 1")
    frames_per_clip = int(round(frames_per_clip))

    raw_frames = np.asarray(raw_frames)
    if raw_frames.dtype == np.uint8:
        raw_frames = raw_frames.astype(np.float32) / 255.0
    if raw_frames.ndim != 4 or raw_frames.shape[1] != 3:
        raise DatasetError(f"raw_frames con forma {raw_frames.shape}; se esperaba T×3×H×W")

    duration = raw_frames.shape[0] / native_fps
    n_clips = int(np.floor(duration / clip_seconds + 1e-9))
    if n_clips < 1:
        raise DatasetError(f"Video de {duration:.2f} s más corto que un clip de {clip_seconds} s")

    clips = []
    for c in range(n_clips):
        times = c * clip_seconds + np.arange(frames_per_clip) / target_hz
        indices = np.minimum(np.floor(times * native_fps + 1e-9).astype(int), raw_frames.shape[0] - 1)
        frames = np.stack([_center_crop_resize(raw_frames[i], out_size) for i in indices])
        clips.append(VideoClip(sample_id=c, frames=frames))

    logger.info("📊 %d clips de %d frames (%.1f Hz)", n_clips, frames_per_clip, target_hz)
    return clips


def _fisher_z_scores(rep_a: np.ndarray, rep_b: np.ndarray) -> np.ndarray:
    """Fisher-z de la correlación por voxel (T×V); varianza cero -> -inf."""
    a = rep_a - rep_a.mean(axis=0)
    b = rep_b - rep_b.mean(axis=0)
    norm = np.sqrt((a ** 2).sum(axis=0) * (b ** 2).sum(axis=0))
    valid = norm > 0
    r = np.zeros(rep_a.shape[1])
    r[valid] = (a * b).sum(axis=0)[valid] / norm[valid]
    z = np.arctanh(np.clip(r, -R_CLIP, R_CLIP))
    z[~valid] = -np.inf
    return z


def select_voxels(repetition_a: np.ndarray, repetition_b: np.ndarray, k: int) -> VoxelSelection:
    """
    Elige los k voxels más reproducibles entre dos repeticiones.

    Acepta una sesión (T×V) o una pila de sesiones (S×T×V); con varias
    sesiones los Fisher-z se promedian. Empates: índice de voxel ascendente.
    """
    a = np.asarray(repetition_a, dtype=np.float64)
    b = np.asarray(repetition_b, dtype=np.float64)
    if a.shape != b.shape:
        raise DatasetError(f"Repeticiones con formas distintas: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a, b = a[None], b[None]
    if a.ndim != 3:
        raise DatasetError(f"Se esperaba T×V o S×T×V, no {repetition_a.shape}")
    if a.shape[1] < 3:
        raise DatasetError(f"Se necesitan al menos 3 puntos temporales, hay {a.shape[1]}")
    if k < 1:
        raise DatasetError(f"k={k} debe ser >= 1")

    per_session = np.stack([_fisher_z_scores(sa, sb) for sa, sb in zip(a, b)])
    with np.errstate(invalid="ignore"):
        scores = per_session.mean(axis=0)
    scores = np.where(np.isnan(scores), -np.inf, scores)

    n_keep = min(k, scores.size)
    order = np.argsort(-scores, kind="stable")
    kept = np.sort(order[:n_keep])
    n_dead = int(np.isinf(scores).sum())
    if n_dead:
        logger.warning("⚠️ %d voxels con varianza cero (score -inf)", n_dead)
    logger.info("📊 Selección de voxels: %d de %d", n_keep, scores.size)
    return VoxelSelection(kept_indices=kept.astype(np.int64), scores=scores, k=k)


def lag_shift(tr_seconds: float, lag_seconds: float) -> int:
    """Desplazamiento en volúmenes; el retardo debe ser múltiplo entero del TR."""
    if tr_seconds <= 0:
        raise DatasetError(f"tr_seconds={tr_seconds} debe ser positivo")
    ratio = lag_seconds / tr_seconds
    if abs(ratio - round(ratio)) > 1e-9:
        raise DatasetError(f"lag_seconds={lag_seconds} no es múltiplo entero de tr_seconds={tr_seconds}")
    return int(round(ratio))


def apply_hemodynamic_lag(bold: np.ndarray, tr_seconds: float, lag_seconds: float) -> np.ndarray:
    """
    Desplaza el BOLD (tiempo×voxels) para que la fila t corresponda al estímulo t.

    Retardo positivo s: fila t = BOLD[t+s] (se pierden las s últimas filas
    emparejables). Retardo negativo: fila t = BOLD[t] para el estímulo t+|s|,
    es decir BOLD[:T-|s|]; aplicar +lag y luego -lag deja la zona solapada.
    """
    bold = np.asarray(bold)
    shift = lag_shift(tr_seconds, lag_seconds)
    if abs(shift) >= bold.shape[0]:
        raise DatasetError(f"El desplazamiento {shift} deja sin volúmenes ({bold.shape[0]} disponibles)")
    if shift >= 0:
        return bold[shift:]
    return bold[:bold.shape[0] + shift]


def pair_stimuli_with_bold(stimuli: np.ndarray, bold: np.ndarray, tr_seconds: float,
                           lag_seconds: float) -> Tuple[np.ndarray, np.ndarray]:
    """Pares (estímulo t, BOLD t+lag); los estímulos sin BOLD se descartan."""
    shifted = apply_hemodynamic_lag(bold, tr_seconds, lag_seconds)
    n = min(len(stimuli), len(shifted))
    return stimuli[:n], shifted[:n]


def fit_zscore(train_fmri: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Media y desvío por voxel del split de entrenamiento (desvío 0 -> 1)."""
    train_fmri = np.asarray(train_fmri, dtype=np.float64)
    mean = train_fmri.mean(axis=0)
    std = train_fmri.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean.astype(np.float32), std.astype(np.float32)


def apply_zscore(fmri: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return ((np.asarray(fmri, dtype=np.float32) - mean) / std).astype(np.float32)
