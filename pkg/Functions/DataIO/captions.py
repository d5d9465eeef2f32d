"""
Regla de emparejamiento de captions: primer frame vs frame del medio.
"""

import logging
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

CAPTION_JOINER = ", and then "


def pair_captions(caption_first: str, caption_mid: str, sim_first: float, sim_mid: float,
                  threshold: float = 0.05, rng: np.random.Generator = None) -> str:
    """
    Combina los captions del primer frame y del frame del medio.

    Si las similitudes texto-frame difieren en no más de `threshold` se elige
    uno de los dos al azar; si no, se concatenan con ", and then ".

    Args:
        caption_first: Caption del primer frame
        caption_mid: Caption del frame del medio
        sim_first: Similitud del caption_first con el frame del medio
        sim_mid: Similitud del caption_mid con el frame del medio
        threshold: Diferencia máxima para considerarlos equivalentes (0.05)
        rng: Generador numpy con semilla

    Returns:
        Caption final
    """
    if abs(sim_first - sim_mid) <= threshold:
        rng = rng if rng is not None else np.random.default_rng(0)
        return caption_first if rng.random() < 0.5 else caption_mid
    return caption_first + CAPTION_JOINER + caption_mid


def caption_similarities(embedder, caption_first: str, caption_mid: str,
                         middle_frame: np.ndarray) -> Tuple[float, float]:
    """Similitud coseno de cada caption con el embedding del frame del medio."""
    frame_embedding = embedder.embed_image(middle_frame)
    sim_first = float(embedder.embed_text(caption_first) @ frame_embedding)
    sim_mid = float(embedder.embed_text(caption_mid) @ frame_embedding)
    return sim_first, sim_mid
