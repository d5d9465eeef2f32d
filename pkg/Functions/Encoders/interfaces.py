"""
Interfaces de los backends intercambiables.

Cualquier objeto que cumpla estos Protocols puede registrarse en
Functions.Encoders.registry y elegirse por nombre en la configuración.
Los backends toy viven en toy_backends.py (embedder, tokenizer, conditioner),
Evaluation (classifier, flow) y Generator (generator).
"""

from typing import Protocol, Tuple, runtime_checkable

import numpy as np

EMBED_DIM = 512
CONDITION_SHAPE = (20, 768)


@runtime_checkable
class EmbeddingBackend(Protocol):
    """Stand-in de CLIP: texto, imagen y video al mismo espacio de dimensión d_e."""

    name: str
    dim: int

    def embed_text(self, text: str) -> np.ndarray: ...

    def embed_image(self, frame: np.ndarray) -> np.ndarray: ...

    def embed_video(self, frames: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class FrameTokenizer(Protocol):
    """Stand-in del VAE: frames <-> latentes <-> tokens."""

    name: str
    spatial_factor: int

    def encode(self, frames: np.ndarray) -> np.ndarray: ...

    def decode(self, latents: np.ndarray) -> np.ndarray: ...

    def tokenize(self, latents: np.ndarray, patch_size: int) -> np.ndarray: ...

    def detokenize(self, tokens: np.ndarray, patch_size: int,
                   frame_size: Tuple[int, int]) -> np.ndarray: ...


@runtime_checkable
class TextConditioner(Protocol):
    """Bloque de condición de texto del generador (20×768)."""

    name: str

    def condition(self, text: str) -> np.ndarray: ...


@runtime_checkable
class ClassifierBackend(Protocol):
    """Clasificador de frames (modo imagen) o clips (modo video)."""

    name: str
    n_classes: int

    def classify_image(self, frame: np.ndarray) -> np.ndarray: ...

    def classify_video(self, frames: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class FlowBackend(Protocol):
    """Flujo óptico entre dos frames: campo 2×H×W (dx, dy)."""

    name: str

    def flow(self, frame_a: np.ndarray, frame_b: np.ndarray) -> np.ndarray: ...


@runtime_checkable
class FrameGeneratorBackend(Protocol):
    """Generador de frames a partir de latentes por frame y la condición."""

    name: str

    def generate(self, latents: np.ndarray, condition: np.ndarray, seed: int,
                 tokenizer: FrameTokenizer, smoothing_steps: int = 0,
                 inversion_steps: int = 0) -> np.ndarray: ...


def check_frames(frames: np.ndarray, ndim: int, what: str = "frames") -> None:
    """Verifica dimensiones y canales (eje de canal = -3)."""
    from Functions.errors import EncoderError

    if frames.ndim != ndim or frames.shape[-3] != 3:
        expected = "3×H×W" if ndim == 3 else "f×3×H×W"
        raise EncoderError(f"{what} con forma {tuple(frames.shape)}; se esperaba {expected}")


def unit(vector: np.ndarray) -> np.ndarray:
    """Normaliza a norma euclídea 1 (float32)."""
    vector = np.asarray(vector, dtype=np.float64)
    return (vector / np.linalg.norm(vector)).astype(np.float32)

