"""
Clasificación n-way top-1 (N ensayos) y clasificador toy del mundo sintético.
"""

import logging
from itertools import product
from typing import Sequence, Union

import numpy as np

from Functions.Encoders.toy_backends import frame_features
from Functions.Encoders.vocabulary import COLOR_NAMES, PALETTE, SHAPE_FILL_RATIOS, SHAPES, SIZE_NAMES, SIZES_PX
from Functions.errors import MetricError

logger = logging.getLogger(__name__)

MODES = ("image", "video")
Seed = Union[int, Sequence[int]]


class ToyClassifier:
    """
    Clases = color × forma × tamaño (54). Probabilidades = softmax de menos la
    distancia de los rasgos del frame (RGB, fill ratio, extensión) a cada
    prototipo. Un frame vacío da probabilidades uniformes.
    """

    COLOR_SCALE = 0.1
    FILL_SCALE = 0.01
    SIZE_SCALE = 4.0

    def __init__(self, name: str = "toy"):
        self.name = name
        self.class_names = [f"{size} {color} {shape}"
                            for color, shape, size in product(COLOR_NAMES, SHAPES, SIZE_NAMES)]
        combos = list(product(range(len(COLOR_NAMES)), range(len(SHAPES)), range(len(SIZES_PX))))
        self._rgb = np.array([PALETTE[COLOR_NAMES[c]] for c, _, _ in combos])
        self._fill = np.array([SHAPE_FILL_RATIOS[SHAPES[s]] for _, s, _ in combos])
        self._size = np.array([SIZES_PX[z] for _, _, z in combos], dtype=np.float64)
        self.n_classes = len(combos)

    def _logits(self, frame: np.ndarray) -> np.ndarray:
        features = frame_features(frame)
        if features is None:
            return np.zeros(self.n_classes)
        rgb, fill, extent = features
        distance = (((self._rgb - rgb) ** 2).sum(axis=1) / self.COLOR_SCALE
                    + (self._fill - fill) ** 2 / self.FILL_SCALE
                    + (self._size - extent) ** 2 / self.SIZE_SCALE)
        return -distance

    @staticmethod
    def _softmax(logits: np.ndarray) -> np.ndarray:
        shifted = np.exp(logits - logits.max())
        return shifted / shifted.sum()

    def classify_image(self, frame: np.ndarray) -> np.ndarray:
        return self._softmax(self._logits(frame))

    def classify_video(self, frames: np.ndarray) -> np.ndarray:
        """Softmax de los logits promediados sobre frames."""
        return self._softmax(np.mean([self._logits(frame) for frame in frames], axis=0))


def _nway_rate(p_gt: np.ndarray, p_pred: np.ndarray, n: int, trials: int, rng: np.random.Generator) -> float:
    true_class = int(np.argmax(p_gt))
    others = np.delete(np.arange(len(p_gt)), true_class)
    successes = 0
    for _ in range(trials):
        candidates = np.concatenate([[true_class], rng.choice(others, size=n - 1, replace=False)])
        scores = p_pred[candidates]
        winners = np.flatnonzero(scores == scores.max())
        successes += int(rng.choice(winners) == 0)
    return successes / trials


def nway_top1(gt: np.ndarray, pred: np.ndarray, n: int, trials: int, mode: str, classifier,
              seed: Seed = 0) -> float:
    """
    Test n-way top-1 con N ensayos.

    La clase verdadera es el argmax del clasificador sobre gt; en cada ensayo
    se sortean n−1 clases distractoras distintas (sin reemplazo, sin la
    verdadera) y hay acierto si la verdadera tiene la mayor probabilidad de
    pred entre las n (empates al azar). En modo 'image' se promedia la tasa
    de cada frame.

    Args:
        gt: Clip verdadero f×3×H×W
        pred: Clip reconstruido f×3×H×W
        n: Número de clases por ensayo
        trials: Número de ensayos N
        mode: 'image' o 'video'
        classifier: ClassifierBackend
        seed: Semilla (int o secuencia de ints)

    Returns:
        Tasa de acierto en [0, 1]
    """
    if mode not in MODES:
        raise MetricError(f"mode={mode!r} debe ser uno de {MODES}")
    if n < 2 or n > classifier.n_classes:
        raise MetricError(f"n={n} debe estar en [2, {classifier.n_classes}] (clases del clasificador)")
    if trials < 1:
        raise MetricError(f"trials={trials} debe ser positivo")
    if np.shape(gt) != np.shape(pred):
        raise MetricError(f"nway_top1: formas distintas {np.shape(gt)} vs {np.shape(pred)}")

    rng = np.random.default_rng(seed)
    if mode == "video":
        return _nway_rate(classifier.classify_video(gt), classifier.classify_video(pred), n, trials, rng)
    rates = [_nway_rate(classifier.classify_image(a), classifier.classify_image(b), n, trials, rng)
             for a, b in zip(gt, pred)]
    return float(np.mean(rates))
