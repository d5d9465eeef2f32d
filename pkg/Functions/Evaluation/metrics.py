"""
Métricas de reconstrucción por clip.

Frames 3×H×W y clips f×3×H×W, valores en [0,1].
"""

import logging

import numpy as np
from skimage.color import rgb2hsv
from skimage.metrics import mean_squared_error, structural_similarity

from Functions.errors import MetricError

logger = logging.getLogger(__name__)

PSNR_CAP = 100.0
HUE_BINS = 32
SSIM_SIGMA = 1.5
SSIM_WIN = 11


def _same_shape(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape != b.shape:
        raise MetricError(f"{what}: formas distintas {a.shape} vs {b.shape}")


def _clip_pair(gt: np.ndarray, pred: np.ndarray, what: str, min_frames: int = 1):
    gt = np.asarray(gt, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    _same_shape(gt, pred, what)
    if gt.ndim != 4 or gt.shape[1] != 3:
        raise MetricError(f"{what}: se esperaba un clip f×3×H×W, no {gt.shape}")
    if gt.shape[0] < min_frames:
        raise MetricError(f"{what}: el clip necesita al menos {min_frames} frames, tiene {gt.shape[0]}")
    return gt, pred


def ssim(gt_frame: np.ndarray, pred_frame: np.ndarray) -> float:
    """SSIM con ventana gaussiana (11, σ 1.5), data range 1, canales promediados."""
    gt_frame = np.asarray(gt_frame, dtype=np.float64)
    pred_frame = np.asarray(pred_frame, dtype=np.float64)
    _same_shape(gt_frame, pred_frame, "ssim")
    channel_axis = 0 if gt_frame.ndim == 3 else None
    try:
        return float(structural_similarity(
            gt_frame, pred_frame, data_range=1.0, channel_axis=channel_axis, gaussian_weights=True,
            sigma=SSIM_SIGMA, win_size=SSIM_WIN, use_sample_covariance=False,
        ))
    except ValueError as e:
        raise MetricError(f"ssim: {e}") from e


def psnr(gt_frame: np.ndarray, pred_frame: np.ndarray) -> float:
    """PSNR = 10·log10(1/MSE) dB; 100 dB si MSE < 1e-10."""
    gt_frame = np.asarray(gt_frame, dtype=np.float64)
    pred_frame = np.asarray(pred_frame, dtype=np.float64)
    _same_shape(gt_frame, pred_frame, "psnr")
    mse = mean_squared_error(gt_frame, pred_frame)
    if mse < 1e-10:
        return PSNR_CAP
    return float(10.0 * np.log10(1.0 / mse))


def ssim_clip(gt: np.ndarray, pred: np.ndarray) -> float:
    gt, pred = _clip_pair(gt, pred, "ssim")
    return float(np.mean([ssim(a, b) for a, b in zip(gt, pred)]))


def psnr_clip(gt: np.ndarray, pred: np.ndarray) -> float:
    gt, pred = _clip_pair(gt, pred, "psnr")
    return float(np.mean([psnr(a, b) for a, b in zip(gt, pred)]))


def _hue_kernel() -> np.ndarray:
    """Kernel circular coseno HUE_BINS×HUE_BINS: K[k, j] = cos(2π(k − j)/HUE_BINS)."""
    offsets = np.subtract.outer(np.arange(HUE_BINS), np.arange(HUE_BINS))
    return np.cos(2.0 * np.pi * offsets / HUE_BINS)


_HUE_KERNEL = _hue_kernel()


def hue_histogram(frame: np.ndarray) -> np.ndarray:
    """Histograma circular de hue en 32 bins, ponderado por s·v y suavizado con el kernel coseno."""
    hsv = rgb2hsv(np.asarray(frame, dtype=np.float64).transpose(1, 2, 0))
    bins = np.minimum(np.floor(hsv[..., 0] * HUE_BINS), HUE_BINS - 1).astype(np.int64)
    weight = hsv[..., 1] * hsv[..., 2]
    histogram = np.bincount(bins.ravel(), weights=weight.ravel(), minlength=HUE_BINS)
    return _HUE_KERNEL @ histogram


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = x - x.mean()
    y = y - y.mean()
    denom = np.sqrt((x ** 2).sum() * (y ** 2).sum())
    if denom < 1e-12:
        return 0.0
    return float((x * y).sum() / denom)


def hue_pcc(gt: np.ndarray, pred: np.ndarray) -> float:
    """
    Correlación de Pearson basada en hue, promediada sobre frames.

    Por frame se correlacionan los histogramas de hue suavizados (ver
    hue_histogram); un histograma sin varianza (frame gris) vale 0. No depende
    de la posición de los colores dentro del frame.
    """
    gt, pred = _clip_pair(gt, pred, "hue_pcc")
    return float(np.mean([_pearson(hue_histogram(a), hue_histogram(b)) for a, b in zip(gt, pred)]))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0:
        raise MetricError("coseno indefinido para un vector nulo")
    return float(a @ b / norm)


def vifi_score(gt: np.ndarray, pred: np.ndarray, video_embedder) -> float:
    """Coseno entre los embeddings de video de ambos clips."""
    gt, pred = _clip_pair(gt, pred, "vifi_score")
    return cosine(video_embedder.embed_video(gt), video_embedder.embed_video(pred))


def clip_pcc(pred: np.ndarray, vifi_value: float, image_embedder, threshold: float = 0.6) -> float:
    """
    Consistencia temporal: media del coseno entre embeddings de frames
    adyacentes, sólo si vifi_value > threshold (estricto); si no, 0.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if pred.ndim != 4 or pred.shape[0] < 2:
        raise MetricError(f"clip_pcc requiere al menos 2 frames, recibió forma {pred.shape}")
    if not vifi_value > threshold:
        return 0.0
    embeddings = [image_embedder.embed_image(frame) for frame in pred]
    return float(np.mean([cosine(a, b) for a, b in zip(embeddings[:-1], embeddings[1:])]))


def epe(gt: np.ndarray, pred: np.ndarray, flow_backend) -> float:
    """
    End-point error: media sobre pares de frames consecutivos y píxeles de
    ‖flow_gt − flow_pred‖₂.
    """
    gt, pred = _clip_pair(gt, pred, "epe", min_frames=2)
    errors = []
    for index in range(gt.shape[0] - 1):
        flow_gt = flow_backend.flow(gt[index], gt[index + 1])
        flow_pred = flow_backend.flow(pred[index], pred[index + 1])
        errors.append(np.sqrt(((flow_gt - flow_pred) ** 2).sum(axis=0)).mean())
    return float(np.mean(errors))


def centroid_trajectory(clip: np.ndarray) -> np.ndarray:
    """
    Centro de masa (x, y) por frame, en píxeles, pesado por el máximo entre
    canales. El píxel i cubre [i, i+1); un frame vacío da nan.

    Returns:
        f×2
    """
    clip = np.asarray(clip, dtype=np.float64)
    if clip.ndim != 4 or clip.shape[1] != 3:
        raise MetricError(f"centroid_trajectory: se esperaba un clip f×3×H×W, no {clip.shape}")
    weights = clip.max(axis=1)
    mass = weights.sum(axis=(1, 2))
    xs = np.arange(clip.shape[3]) + 0.5
    ys = np.arange(clip.shape[2]) + 0.5
    with np.errstate(invalid="ignore", divide="ignore"):
        cx = (weights.sum(axis=1) * xs).sum(axis=1) / mass
        cy = (weights.sum(axis=2) * ys).sum(axis=1) / mass
    return np.stack([cx, cy], axis=1)


def velocity_sign_agreement(clips: np.ndarray, velocities: np.ndarray, min_speed: float = 0.25) -> float:
    """
    Fracción de componentes de velocidad con |v| >= min_speed (px/frame)
    cuyo signo coincide con el del desplazamiento del centroide entre el
    primer y el último frame.
    """
    velocities = np.asarray(velocities, dtype=np.float64)
    if len(clips) != len(velocities) or velocities.ndim != 2 or velocities.shape[1] != 2:
        raise MetricError(f"velocity_sign_agreement: {len(clips)} clips y velocidades {velocities.shape}")
    hits = []
    for clip, velocity in zip(clips, velocities):
        trajectory = centroid_trajectory(clip)
        displacement = trajectory[-1] - trajectory[0]
        moving = np.abs(velocity) >= min_speed
        hits.extend(np.sign(displacement[moving]) == np.sign(velocity[moving]))
    if not hits:
        raise MetricError(f"ninguna componente de velocidad alcanza min_speed={min_speed}")
    return float(np.mean(hits))
