"""
Flujo óptico por block matching exhaustivo (backend 'toy' de flow).

Bloques de 8×8 del frame a se buscan en el frame b dentro de ±4 px con
costo SAD sobre el gris. Empates: gana el desplazamiento de menor |d|,
luego menor dy, luego menor dx.
"""

import logging
from typing import List, Tuple

import numpy as np
from einops import reduce

from Functions.errors import MetricError

logger = logging.getLogger(__name__)


class BlockMatchingFlow:
    def __init__(self, name: str = "toy", block: int = 8, search: int = 4):
        self.name = name
        self.block = block
        self.search = search
        self._candidates: List[Tuple[int, int]] = sorted(
            ((dy, dx) for dy in range(-search, search + 1) for dx in range(-search, search + 1)),
            key=lambda d: (d[0] ** 2 + d[1] ** 2, d[0], d[1]),
        )

    def _gray(self, frame: np.ndarray) -> np.ndarray:
        frame = np.asarray(frame, dtype=np.float64)
        if frame.ndim == 3:
            frame = frame.mean(axis=0)
        if frame.ndim != 2:
            raise MetricError(f"flow: frame con forma {frame.shape}; se esperaba 3×H×W o H×W")
        if frame.shape[0] % self.block or frame.shape[1] % self.block:
            raise MetricError(f"flow: H×W={frame.shape} debe ser múltiplo de {self.block}")
        return frame

    def flow(self, frame_a: np.ndarray, frame_b: np.ndarray) -> np.ndarray:
        """Campo 2×H×W (dx, dy): a dónde se movió cada bloque de a en b."""
        a = self._gray(frame_a)
        b = self._gray(frame_b)
        if a.shape != b.shape:
            raise MetricError(f"flow: formas distintas {a.shape} vs {b.shape}")
        height, width = a.shape
        s = self.search
        padded = np.pad(b, s, mode="edge")

        costs = np.stack([
            reduce(np.abs(padded[s + dy:s + dy + height, s + dx:s + dx + width] - a),
                   "(h p1) (w p2) -> h w", "sum", p1=self.block, p2=self.block)
            for dy, dx in self._candidates
        ])
        # argmin devuelve el primer mínimo: el orden de candidatos resuelve empates
        best = np.asarray(self._candidates)[costs.argmin(axis=0)]
        field = np.stack([best[..., 1], best[..., 0]]).astype(np.float32)
        return field.repeat(self.block, axis=1).repeat(self.block, axis=2)
