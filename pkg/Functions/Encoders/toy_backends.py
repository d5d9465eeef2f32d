"""
Backends toy deterministas: embedder (stand-in de CLIP), tokenizer (stand-in
del VAE) y conditioner (bloque de texto 20×768).

El embedder no aprende nada: estima un descriptor de contenido (color, forma,
tamaño) a partir de los píxeles o de las palabras del caption y lo proyecta con
una matriz ortonormal fija. Un clip sintético y su caption caen así casi en el
mismo punto del espacio (coseno >= 0.99).
"""

import hashlib
import logging
import re
import zlib
from typing import List, Optional, Sequence, Tuple

import numpy as np
from einops import rearrange

from Functions.errors import EncoderError
from .interfaces import CONDITION_SHAPE, EMBED_DIM, check_frames, unit
from .vocabulary import (
    COLOR_NAMES,
    PALETTE,
    SHAPE_FILL_RATIOS,
    SHAPES,
    SIZE_NAMES,
    SIZES_PX,
    STOPWORDS,
)

logger = logging.getLogger(__name__)

# layout del descriptor: [color | forma | tamaño | histograma | presencia | hash]
N_HIST_BINS = 16
N_HASH_BUCKETS = 32
HIST_WEIGHT = 0.1
PRESENCE_WEIGHT = 0.05
HASH_WEIGHT = 0.05
COVERAGE_FLOOR = 0.05

_COLOR = slice(0, 6)
_SHAPE = slice(6, 9)
_SIZE = slice(9, 12)
_HIST = slice(12, 12 + N_HIST_BINS)
_PRESENCE = 12 + N_HIST_BINS
_HASH = slice(_PRESENCE + 1, _PRESENCE + 1 + N_HASH_BUCKETS)
DESCRIPTOR_DIM = _PRESENCE + 1 + N_HASH_BUCKETS

_PALETTE_RGB = np.array([PALETTE[name] for name in COLOR_NAMES])
_FILL_RATIOS = np.array([SHAPE_FILL_RATIOS[name] for name in SHAPES])
_SIZES = np.array(SIZES_PX, dtype=np.float64)


def seed_from_name(name: str) -> int:
    """Semilla estable (entre procesos) derivada de un nombre."""
    return int.from_bytes(hashlib.sha256(name.encode("utf-8")).digest()[:8], "little")


def _centred_one_hot(counts: np.ndarray) -> np.ndarray:
    """One-hot (o mezcla de one-hots) menos su media uniforme; cero si no hay votos."""
    total = counts.sum()
    if total == 0:
        return np.zeros_like(counts, dtype=np.float64)
    return counts / total - 1.0 / len(counts)


def frame_features(frame: np.ndarray) -> Optional[Tuple[np.ndarray, float, float]]:
    """
    Rasgos continuos de la figura de un frame 3×H×W en [0,1].

    Returns:
        (RGB medio, fill ratio, extensión en px), o None si el frame no tiene
        cobertura suficiente
    """
    frame = np.asarray(frame, dtype=np.float64)
    coverage = frame.max(axis=0).clip(0.0, 1.0)
    coverage = np.where(coverage >= COVERAGE_FLOOR, coverage, 0.0)
    area = coverage.sum()
    if area < 0.5:
        return None

    solid = coverage >= 0.5
    weights = coverage if not solid.any() else np.where(solid, coverage, 0.0)
    rgb = (frame * (weights > 0)).reshape(3, -1).sum(axis=1) / weights.sum()

    # extensión ponderada: suma del máximo de cobertura por columna / fila
    width = coverage.max(axis=0).sum()
    height = coverage.max(axis=1).sum()
    fill = area / max(width * height, 1e-12)
    return rgb, float(fill), float(max(width, height))


def estimate_attributes(frame: np.ndarray) -> Optional[Tuple[int, int, int, np.ndarray]]:
    """
    Estima (color, forma, tamaño) de la figura de un frame 3×H×W en [0,1].

    Returns:
        (índice de color, índice de forma, índice de tamaño, RGB medio), o None
        si el frame no tiene cobertura suficiente
    """
    features = frame_features(frame)
    if features is None:
        return None
    rgb, fill, extent = features
    color = int(np.argmin(((_PALETTE_RGB - rgb) ** 2).sum(axis=1)))
    shape = int(np.argmin(np.abs(_FILL_RATIOS - fill)))
    size = int(np.argmin(np.abs(_SIZES - extent)))
    return color, shape, size, rgb


def image_descriptor(frame: np.ndarray) -> np.ndarray:
    """Descriptor de contenido de un frame (vector de DESCRIPTOR_DIM)."""
    frame = np.asarray(frame, dtype=np.float64)
    check_frames(frame, 3, "frame")
    descriptor = np.zeros(DESCRIPTOR_DIM)

    attributes = estimate_attributes(frame)
    if attributes is not None:
        color, shape, size, _ = attributes
        descriptor[_COLOR] = _centred_one_hot(np.eye(len(COLOR_NAMES))[color])
        descriptor[_SHAPE] = _centred_one_hot(np.eye(len(SHAPES))[shape])
        descriptor[_SIZE] = _centred_one_hot(np.eye(len(SIZES_PX))[size])

    coverage = frame.max(axis=0).clip(0.0, 1.0)
    covered = coverage[coverage > 0]
    if covered.size:
        hist, _ = np.histogram(covered, bins=N_HIST_BINS, range=(0.0, 1.0))
        descriptor[_HIST] = HIST_WEIGHT * hist / covered.size

    descriptor[_PRESENCE] = PRESENCE_WEIGHT
    return descriptor


def text_tokens(text: str) -> List[str]:
    """Tokens en minúscula (solo letras)."""
    return re.findall(r"[a-z]+", text.lower())


def text_descriptor(text: str) -> np.ndarray:
    """Descriptor de contenido de un caption: atributos reconocidos + buckets hash."""
    descriptor = np.zeros(DESCRIPTOR_DIM)
    colors = np.zeros(len(COLOR_NAMES))
    shapes = np.zeros(len(SHAPES))
    sizes = np.zeros(len(SIZE_NAMES))
    others = set()
    for token in text_tokens(text):
        if token in COLOR_NAMES:
            colors[COLOR_NAMES.index(token)] += 1
        elif token in SHAPES:
            shapes[SHAPES.index(token)] += 1
        elif token in SIZE_NAMES:
            sizes[SIZE_NAMES.index(token)] += 1
        elif token not in STOPWORDS:
            others.add(token)

    descriptor[_COLOR] = _centred_one_hot(colors)
    descriptor[_SHAPE] = _centred_one_hot(shapes)
    descriptor[_SIZE] = _centred_one_hot(sizes)
    descriptor[_PRESENCE] = PRESENCE_WEIGHT
    hashed = descriptor[_HASH]
    for token in sorted(others):
        hashed[zlib.crc32(token.encode("utf-8")) % N_HASH_BUCKETS] += HASH_WEIGHT
    return descriptor


class ToyEmbedder:
    """Embedder determinista: descriptor de contenido -> proyección ortonormal fija -> norma 1."""

    def __init__(self, name: str = "toy", dim: int = EMBED_DIM):
        if dim < DESCRIPTOR_DIM:
            raise EncoderError(f"dim={dim} debe ser >= {DESCRIPTOR_DIM}")
        self.name = name
        self.dim = dim
        rng = np.random.default_rng(seed_from_name(f"embedder:{name}"))
        # columnas ortonormales: preserva productos internos del descriptor
        self._projection, _ = np.linalg.qr(rng.standard_normal((dim, DESCRIPTOR_DIM)))
        logger.debug("📊 Embedder toy %r: descriptor %d -> %d", name, DESCRIPTOR_DIM, dim)

    def _project(self, descriptor: np.ndarray) -> np.ndarray:
        return unit(self._projection @ descriptor)

    def embed_text(self, text: str) -> np.ndarray:
        if not isinstance(text, str) or not text.strip():
            raise EncoderError("embed_text requiere un texto no vacío")
        return self._project(text_descriptor(text))

    def embed_image(self, frame: np.ndarray) -> np.ndarray:
        return self._project(image_descriptor(frame))

    def embed_video(self, frames: np.ndarray) -> np.ndarray:
        """Media de los embeddings por frame, renormalizada."""
        frames = np.asarray(frames)
        check_frames(frames, 4)
        if frames.shape[0] == 0:
            raise EncoderError("embed_video requiere al menos un frame")
        per_frame = np.stack([self.embed_image(frame) for frame in frames]).astype(np.float64)
        return unit(per_frame.mean(axis=0))

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.embed_text(text) for text in texts])

    def embed_videos(self, clips: np.ndarray) -> np.ndarray:
        return np.stack([self.embed_video(clip) for clip in clips])


class ToyConditioner:
    """Condición 20×768: proyección aleatoria fija del descriptor de texto."""

    def __init__(self, name: str = "toy"):
        self.name = name
        rng = np.random.default_rng(seed_from_name(f"conditioner:{name}"))
        width = CONDITION_SHAPE[0] * CONDITION_SHAPE[1]
        self._matrix = rng.standard_normal((DESCRIPTOR_DIM, width)) / np.sqrt(DESCRIPTOR_DIM)

    def condition(self, text: str) -> np.ndarray:
        # caption vacío -> solo el término de presencia
        descriptor = text_descriptor(text or "")
        return (descriptor @ self._matrix).reshape(CONDITION_SHAPE).astype(np.float32)

    def condition_batch(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.condition(text) for text in texts])


def _dct_matrix(size: int) -> np.ndarray:
    """Matriz DCT-II ortonormal size×size."""
    k = np.arange(size)[:, None]
    n = np.arange(size)[None, :]
    matrix = np.cos(np.pi * (2 * n + 1) * k / (2 * size)) * np.sqrt(2.0 / size)
    matrix[0] /= np.sqrt(2.0)
    return matrix


class ToyTokenizer:
    """
    Tokenizer lineal ortogonal: DCT 8×8 por bloque.

    encode:  (..., 3, H, W) -> (..., 3, H/8, W/8, 64)
    tokenize: latentes -> (..., P, 3·patch²) con P = (H/patch)(W/patch)
    """

    def __init__(self, name: str = "toy", block: int = 8):
        self.name = name
        self.spatial_factor = block
        self.block = block
        dct = _dct_matrix(block)
        self._basis = np.kron(dct, dct)

    def _check_hw(self, height: int, width: int) -> None:
        if height % self.block or width % self.block:
            raise EncoderError(f"H={height}, W={width} deben ser divisibles por {self.block}")

    def encode(self, frames: np.ndarray) -> np.ndarray:
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim < 3 or frames.shape[-3] != 3:
            raise EncoderError(f"frames con forma {frames.shape}; se esperaba (..., 3, H, W)")
        self._check_hw(*frames.shape[-2:])
        blocks = rearrange(frames, "... c (h p1) (w p2) -> ... c h w (p1 p2)",
                           p1=self.block, p2=self.block)
        return (blocks @ self._basis.T).astype(np.float32)

    def decode(self, latents: np.ndarray) -> np.ndarray:
        latents = np.asarray(latents, dtype=np.float64)
        if latents.ndim < 4 or latents.shape[-1] != self.block ** 2 or latents.shape[-4] != 3:
            raise EncoderError(f"latentes con forma {latents.shape}; se esperaba (..., 3, h, w, {self.block ** 2})")
        blocks = latents @ self._basis
        return rearrange(blocks, "... c h w (p1 p2) -> ... c (h p1) (w p2)",
                         p1=self.block, p2=self.block).astype(np.float32)

    def _cells(self, patch_size: int, grid: Tuple[int, int]) -> int:
        if patch_size <= 0 or patch_size % self.block:
            raise EncoderError(f"patch_size={patch_size} debe ser múltiplo positivo de {self.block}")
        cells = patch_size // self.block
        if grid[0] % cells or grid[1] % cells:
            raise EncoderError(
                f"la grilla latente {grid[0]}×{grid[1]} no es divisible en patches de {patch_size} px"
            )
        return cells

    def tokenize(self, latents: np.ndarray, patch_size: int) -> np.ndarray:
        latents = np.asarray(latents)
        cells = self._cells(patch_size, latents.shape[-3:-1])
        return rearrange(latents, "... c (h a) (w b) k -> ... (h w) (c a b k)", a=cells, b=cells)

    def detokenize(self, tokens: np.ndarray, patch_size: int,
                   frame_size: Tuple[int, int]) -> np.ndarray:
        tokens = np.asarray(tokens)
        height, width = frame_size
        self._check_hw(height, width)
        cells = self._cells(patch_size, (height // self.block, width // self.block))
        expected = (height // patch_size * (width // patch_size), 3 * patch_size ** 2)
        if tuple(tokens.shape[-2:]) != expected:
            raise EncoderError(f"tokens con forma {tokens.shape}; se esperaba (..., {expected[0]}, {expected[1]})")
        return rearrange(tokens, "... (h w) (c a b k) -> ... c (h a) (w b) k",
                         h=height // patch_size, c=3, a=cells, b=cells)

    def frames_to_tokens(self, frames: np.ndarray, patch_size: int) -> np.ndarray:
        return self.tokenize(self.encode(frames), patch_size)

    def tokens_to_frames(self, tokens: np.ndarray, patch_size: int,
                         frame_size: Tuple[int, int]) -> np.ndarray:
        return self.decode(self.detokenize(tokens, patch_size, frame_size))


def token_width(patch_size: int) -> int:
    """Ancho de un token crudo: 3·patch²."""
    return 3 * patch_size ** 2


def tokens_per_frame(frame_size: Tuple[int, int], patch_size: int) -> int:
    return (frame_size[0] // patch_size) * (frame_size[1] // patch_size)
