"""
Bloques del generador de movimiento: atención multi-cabeza con máscara
booleana, LayerNorm adaptativa (modulada por fMRI) y el bloque
temporal/espacial de cada capa.
"""

import math
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F
from einops import rearrange

from Functions.errors import MotionGeneratorError

VARIANTS = ("cross_attention", "adaLN", "temporal_cross", "temporal_adaLN")


def sinusoidal_encoding(n_positions: int, dim: int) -> torch.Tensor:
    """Codificación sinusoidal fija (n_positions × dim)."""
    position = torch.arange(n_positions, dtype=torch.float64)[:, None]
    div = torch.exp(torch.arange(0, dim, 2, dtype=torch.float64) * (-math.log(10000.0) / dim))
    encoding = torch.zeros(n_positions, dim, dtype=torch.float64)
    encoding[:, 0::2] = torch.sin(position * div)
    encoding[:, 1::2] = torch.cos(position * div)[:, :dim // 2]
    return encoding.float()


class Attention(nn.Module):
    """Atención multi-cabeza: Q desde x, K/V desde context; allowed[q, k] True = visible."""

    def __init__(self, dim: int, n_heads: int):
        super().__init__()
        self.n_heads = n_heads
        self.w_q = nn.Linear(dim, dim)
        self.w_k = nn.Linear(dim, dim)
        self.w_v = nn.Linear(dim, dim)
        self.w_o = nn.Linear(dim, dim)

    def forward(self, x: torch.Tensor, context: Optional[torch.Tensor] = None,
                allowed: Optional[torch.Tensor] = None) -> torch.Tensor:
        context = x if context is None else context
        q = rearrange(self.w_q(x), "b l (h d) -> b h l d", h=self.n_heads)
        k = rearrange(self.w_k(context), "b l (h d) -> b h l d", h=self.n_heads)
        v = rearrange(self.w_v(context), "b l (h d) -> b h l d", h=self.n_heads)
        scores = q @ k.transpose(-2, -1) / math.sqrt(q.shape[-1])
        if allowed is not None:
            scores = scores.masked_fill(~allowed, float("-inf"))
        out = F.softmax(scores, dim=-1) @ v
        return self.w_o(rearrange(out, "b h l d -> b l (h d)"))


class AdaLN(nn.Module):
    """adaLN(z, f) = scale(f) · LayerNorm(z) + shift(f)."""

    def __init__(self, dim: int):
        super().__init__()
        self.norm = nn.LayerNorm(dim, elementwise_affine=False)
        self.modulation = nn.Linear(dim, 2 * dim)
        # identidad al inicio: scale = 1, shift = 0
        nn.init.zeros_(self.modulation.weight)
        with torch.no_grad():
            self.modulation.bias.copy_(torch.cat([torch.ones(dim), torch.zeros(dim)]))

    def forward(self, z: torch.Tensor, fmri_summary: torch.Tensor) -> torch.Tensor:
        scale, shift = self.modulation(fmri_summary).unsqueeze(1).chunk(2, dim=-1)
        return scale * self.norm(z) + shift


class FeedForward(nn.Module):
    def __init__(self, dim: int, mult: int = 4):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(dim, mult * dim), nn.GELU(), nn.Linear(mult * dim, dim))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.net(x)


class CmgBlock(nn.Module):
    """
    Una capa del CMG:

        t   = z_prev + TemporalAttn(LN(z_prev))            (máscara causal dispersa)
        s   = t + Spatial(t, Emb(f))                        (cross-attn, adaLN o self-attn por frame)
        z_l = FFN(LN(s) + z_prev)
    """

    def __init__(self, dim: int, n_heads: int, variant: str = "cross_attention", guided: bool = True):
        super().__init__()
        if variant not in VARIANTS:
            raise MotionGeneratorError(f"variante desconocida {variant!r}; variantes: {VARIANTS}")
        self.variant = variant
        self.guided = guided
        self.temporal_norm = AdaLN(dim) if variant == "temporal_adaLN" else nn.LayerNorm(dim)
        self.temporal_attn = Attention(dim, n_heads)
        if not guided:
            self.spatial = Attention(dim, n_heads)
        elif variant == "adaLN":
            self.spatial = AdaLN(dim)
        else:
            self.spatial_norm = nn.LayerNorm(dim)
            self.spatial = Attention(dim, n_heads)
        self.out_norm = nn.LayerNorm(dim)
        self.ffn = FeedForward(dim)

    def forward(self, z_prev: torch.Tensor, fmri_tokens: torch.Tensor, allowed: torch.Tensor,
                same_frame: torch.Tensor) -> torch.Tensor:
        summary = fmri_tokens.mean(dim=1)
        if self.variant == "temporal_adaLN":
            normed = self.temporal_norm(z_prev, summary)
        else:
            normed = self.temporal_norm(z_prev)

        if self.variant == "temporal_cross":
            # tokens fMRI como claves siempre visibles de la atención temporal
            context = torch.cat([normed, fmri_tokens], dim=1)
            extra = torch.ones(allowed.shape[0], fmri_tokens.shape[1], dtype=torch.bool, device=allowed.device)
            t = z_prev + self.temporal_attn(normed, context, torch.cat([allowed, extra], dim=1))
        else:
            t = z_prev + self.temporal_attn(normed, allowed=allowed)

        if not self.guided:
            s = t + self.spatial(t, allowed=same_frame)
        elif self.variant == "adaLN":
            s = t + self.spatial(t, summary)
        else:
            s = t + self.spatial(self.spatial_norm(t), fmri_tokens)

        return self.ffn(self.out_norm(s) + z_prev)
