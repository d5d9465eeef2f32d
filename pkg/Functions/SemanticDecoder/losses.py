"""
Pérdidas del decodificador semántico.

- bi_infonce: InfoNCE bidireccional (filas y columnas de la matriz de similitud)
- semantic_loss: α·InfoNCE(f, t) + (1−α)·InfoNCE(f, v)
- combined_loss: ‖f−t‖² + λ1·semantic_loss + λ2·‖c_pred − c_true‖²
"""

from typing import Dict, Union

import torch
import torch.nn.functional as F

from Functions.errors import DecoderError

Tau = Union[float, torch.Tensor]


def _check_pair(a: torch.Tensor, b: torch.Tensor, what: str) -> None:
    if a.shape != b.shape:
        raise DecoderError(f"{what}: formas distintas {tuple(a.shape)} vs {tuple(b.shape)}")
    if a.ndim != 2 or a.shape[0] == 0:
        raise DecoderError(f"{what}: se esperaba un batch B×d con B >= 1, no {tuple(a.shape)}")
    if not (torch.isfinite(a).all() and torch.isfinite(b).all()):
        raise DecoderError(f"{what}: entrada no finita")


def bi_infonce(z_hat: torch.Tensor, z: torch.Tensor, tau: Tau) -> torch.Tensor:
    """
    InfoNCE bidireccional con temperatura tau.

    loss = −(1/B) Σᵢ [log softmax_filas(S)ᵢᵢ + log softmax_columnas(S)ᵢᵢ],
    S = ẑ·zᵀ / τ. Las filas deben venir normalizadas.
    """
    _check_pair(z_hat, z, "bi_infonce")
    tau = torch.as_tensor(tau, dtype=z_hat.dtype)
    if not torch.isfinite(tau) or tau <= 0:
        raise DecoderError(f"bi_infonce: tau={float(tau)} debe ser positivo y finito")
    logits = z_hat @ z.T / tau
    row_terms = torch.diagonal(F.log_softmax(logits, dim=1))
    col_terms = torch.diagonal(F.log_softmax(logits, dim=0))
    return -(row_terms + col_terms).sum() / z_hat.shape[0]


def semantic_loss(f: torch.Tensor, t: torch.Tensor, v: torch.Tensor, alpha: float,
                  tau: Tau) -> torch.Tensor:
    """Pérdida tri-modal fMRI-texto-video."""
    if not 0.0 <= alpha <= 1.0:
        raise DecoderError(f"alpha={alpha} debe estar en [0, 1]")
    return alpha * bi_infonce(f, t, tau) + (1.0 - alpha) * bi_infonce(f, v, tau)


def combined_loss_terms(f: torch.Tensor, t: torch.Tensor, c_pred: torch.Tensor,
                        c_true: torch.Tensor, lambda1: float, lambda2: float, alpha: float,
                        v: torch.Tensor, tau: Tau) -> Dict[str, torch.Tensor]:
    """Los tres términos y el total; t se trata como objetivo constante."""
    _check_pair(f, t, "combined_loss (f, t)")
    if c_pred.shape != c_true.shape or c_pred.shape[0] != f.shape[0]:
        raise DecoderError(
            f"combined_loss: condición con formas {tuple(c_pred.shape)} vs {tuple(c_true.shape)} para B={f.shape[0]}"
        )
    target = t.detach()
    projection = ((f - target) ** 2).sum(dim=1).mean()
    semantic = semantic_loss(f, target, v, alpha, tau)
    condition = ((c_pred - c_true) ** 2).flatten(1).sum(dim=1).mean()
    total = projection + lambda1 * semantic + lambda2 * condition
    return {"projection": projection, "semantic": semantic, "condition": condition, "total": total}


def combined_loss(f: torch.Tensor, t: torch.Tensor, c_pred: torch.Tensor, c_true: torch.Tensor,
                  lambda1: float, lambda2: float, alpha: float, v: torch.Tensor,
                  tau: Tau) -> torch.Tensor:
    """L = mean‖f−t‖² + λ1·semantic_loss(f, t, v) + λ2·mean‖c_pred − c_true‖²."""
    return combined_loss_terms(f, t, c_pred, c_true, lambda1, lambda2, alpha, v, tau)["total"]
