"""
Máscara causal dispersa a nivel de frame.

allowed[q, k] = True si el token q puede atender al token k. La parte fija
bloquea todo frame futuro; en modo 'train' se bloquea además, al azar, una
fracción mask_ratio de los pares (frame q, frame pasado k). El propio frame
nunca se bloquea, así que ninguna fila queda sin claves visibles.
"""

from dataclasses import dataclass
from typing import Optional

import torch

from Functions.errors import MotionGeneratorError

MODES = ("train", "inference")


@dataclass(frozen=True)
class SparseCausalMask:
    allowed: torch.Tensor
    frame_allowed: torch.Tensor
    mode: str
    frames: int
    tokens_per_frame: int

    def blocked_fraction(self) -> float:
        """Fracción bloqueada de los pares (q, k) con k estrictamente en el pasado."""
        eligible = torch.tril(torch.ones(self.frames, self.frames, dtype=torch.bool), diagonal=-1)
        n_eligible = int(eligible.sum())
        if n_eligible == 0:
            return 0.0
        return float((eligible & ~self.frame_allowed).sum()) / n_eligible


def causal_frame_mask(frames: int) -> torch.Tensor:
    """Parte fija: frame k visible para q sii k <= q."""
    return torch.tril(torch.ones(frames, frames, dtype=torch.bool))


def expand_frame_mask(frame_allowed: torch.Tensor, tokens_per_frame: int) -> torch.Tensor:
    """Aplica la decisión de cada par de frames a todos sus tokens."""
    return frame_allowed.repeat_interleave(tokens_per_frame, dim=0).repeat_interleave(tokens_per_frame, dim=1)


def build_mask(frames: int, tokens_per_frame: int, mask_ratio: float, mode: str = "train",
               seed: Optional[int] = None, generator: Optional[torch.Generator] = None) -> SparseCausalMask:
    """
    Construye la máscara para una secuencia de `frames` frames.

    Args:
        frames: Número de frames de la secuencia (>= 2)
        tokens_per_frame: Tokens por frame
        mask_ratio: Fracción esperada de pares pasados bloqueados en 'train' ([0, 1))
        mode: 'train' o 'inference' (en inferencia no hay parte aleatoria)
        seed: Semilla (si no se pasa generator)
        generator: torch.Generator a usar para la parte aleatoria

    Returns:
        SparseCausalMask
    """
    if frames < 2:
        raise MotionGeneratorError(f"frames={frames} debe ser >= 2")
    if tokens_per_frame < 1:
        raise MotionGeneratorError(f"tokens_per_frame={tokens_per_frame} debe ser >= 1")
    if not 0.0 <= mask_ratio < 1.0:
        raise MotionGeneratorError(f"mask_ratio={mask_ratio} debe estar en [0, 1)")
    if mode not in MODES:
        raise MotionGeneratorError(f"mode={mode!r} debe ser uno de {MODES}")

    frame_allowed = causal_frame_mask(frames)
    if mode == "train" and mask_ratio > 0:
        if generator is None:
            generator = torch.Generator()
            generator.manual_seed(0 if seed is None else seed)
        past = torch.tril(torch.ones(frames, frames, dtype=torch.bool), diagonal=-1)
        blocked = past & (torch.rand(frames, frames, generator=generator) < mask_ratio)
        frame_allowed = frame_allowed & ~blocked

    return SparseCausalMask(
        allowed=expand_frame_mask(frame_allowed, tokens_per_frame),
        frame_allowed=frame_allowed,
        mode=mode,
        frames=frames,
        tokens_per_frame=tokens_per_frame,
    )


def same_frame_mask(frames: int, tokens_per_frame: int) -> torch.Tensor:
    """Atención espacial restringida a tokens del mismo frame."""
    return expand_frame_mask(torch.eye(frames, dtype=torch.bool), tokens_per_frame)
