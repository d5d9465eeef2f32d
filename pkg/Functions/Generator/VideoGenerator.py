"""
Etapa característica -> video.

Combina la condición semántica (20×768), el latente estructural del primer
frame y los tokens de movimiento del CMG en frames RGB, a través de un
backend de generación intercambiable. El backend toy es la inversa exacta
del tokenizer (detokenize -> decode), así que los features verdaderos
reproducen el clip de estímulo.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import torch
import torch.nn.functional as F
from einops import rearrange
from PIL import Image

from Functions.DataIO.array_store import read_arrays, read_json, write_arrays, write_json
from Functions.DataIO.dataset import VideoClip, VideoDataset, frames_from_u8, frames_to_u8
from Functions.errors import ConfigError, GenerationError
from Functions.MotionGenerator import CmgState, PerFrameMlpState, generate_motion, predict_perframe
from Functions.SemanticDecoder import SemanticDecoderState, decode_semantic
from Functions.StructureDecoder import StructureDecoderState, decode_structure
from Functions.Training import progress

logger = logging.getLogger(__name__)

SUBSTITUTIONS = {"semantic": ("noise",), "structure": ("noise",), "motion": ("noise", "mlp")}
RECONSTRUCTION_KIND = "reconstruction"
SAMPLE_DIR = "sample_{:04d}"
FRAME_FILE = "frame_{:02d}.png"


@dataclass(frozen=True)
class GenerationRequest:
    """Entrada de una reconstrucción: condición, tokens de los n frames y parámetros del generador."""

    condition: np.ndarray
    motion_tokens: np.ndarray
    smoothing_steps: int = 250
    inversion_steps: int = 50
    seed: int = 0

    def __post_init__(self):
        if np.asarray(self.motion_tokens).ndim != 3 or len(self.motion_tokens) == 0:
            raise GenerationError(
                f"motion_tokens con forma {np.shape(self.motion_tokens)}; se esperaba n×P×ancho con n >= 1"
            )
        if self.inversion_steps > self.smoothing_steps:
            raise GenerationError(
                f"inversion_steps={self.inversion_steps} no puede superar smoothing_steps={self.smoothing_steps}"
            )


class ToyFrameGenerator:
    """Generador toy: latentes -> píxeles con el decoder del tokenizer. Ignora la condición y el schedule."""

    def __init__(self, name: str = "toy"):
        self.name = name

    def generate(self, latents: np.ndarray, condition: np.ndarray, seed: int, tokenizer,
                 smoothing_steps: int = 0, inversion_steps: int = 0) -> np.ndarray:
        return np.clip(tokenizer.decode(latents), 0.0, 1.0).astype(np.float32)


def reconstruct_video(request: GenerationRequest, backend, tokenizer, patch_size: int,
                      frame_size: Tuple[int, int], sample_id: int = 0) -> VideoClip:
    """
    Genera el clip de una petición.

    Los tokens (B=1, f, P, ancho) se aplanan a (B·f, ...) y cada frame se
    genera por separado; ningún frame recibe información de otro salvo sus
    propios tokens.

    Args:
        request: GenerationRequest
        backend: FrameGeneratorBackend
        tokenizer: FrameTokenizer usado para volver de tokens a latentes
        patch_size: Tamaño de patch de los tokens
        frame_size: (H, W) de salida
        sample_id: Id del clip devuelto

    Returns:
        VideoClip f×3×H×W en [0,1]
    """
    tokens = np.asarray(request.motion_tokens, dtype=np.float32)[None]
    batch, n_frames = tokens.shape[:2]
    flat = rearrange(tokens, "b f p w -> (b f) p w")
    latents = tokenizer.detokenize(flat, patch_size, frame_size)

    frames = []
    for index in range(flat.shape[0]):
        try:
            frame = backend.generate(latents[index:index + 1], request.condition, request.seed + index,
                                     tokenizer, request.smoothing_steps, request.inversion_steps)
        except GenerationError:
            raise
        except Exception as e:
            raise GenerationError(f"el backend {backend.name!r} falló: {e}", frame_index=index) from e
        frame = np.asarray(frame, dtype=np.float32)
        if frame.shape != (1, 3, *frame_size):
            raise GenerationError(f"el backend devolvió forma {frame.shape}; se esperaba (1, 3, {frame_size[0]}, "
                                  f"{frame_size[1]})", frame_index=index)
        if not np.all(np.isfinite(frame)) or frame.min() < 0.0 or frame.max() > 1.0:
            raise GenerationError("el backend devolvió píxeles fuera de [0,1]", frame_index=index)
        frames.append(frame[0])

    clip = rearrange(np.stack(frames), "(b f) c h w -> b f c h w", b=batch, f=n_frames)
    return VideoClip(sample_id=sample_id, frames=clip[0])


def inflate_attention_kv(z_frames: Sequence[np.ndarray], i: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Regla de inflado: Q sobre z_i; K y V sobre concat(z_0, z_{i-1}).

    Para i = 0 el predecesor es el propio z_0, así que el contexto es [z_0, z_0].

    Args:
        z_frames: Latentes por frame, cada uno L×d
        i: Índice del frame

    Returns:
        (query L×d, contexto K/V 2L×d)
    """
    if len(z_frames) == 0:
        raise GenerationError("inflate_attention_kv requiere al menos un frame")
    if not 0 <= i < len(z_frames):
        raise GenerationError(f"índice de frame {i} fuera de [0, {len(z_frames) - 1}]", frame_index=i)
    first = np.asarray(z_frames[0])
    previous = np.asarray(z_frames[max(i - 1, 0)])
    return np.asarray(z_frames[i]), np.concatenate([first, previous], axis=0)


def inflated_attention(z_frames: Sequence[np.ndarray], i: int) -> np.ndarray:
    """Atención (sin proyecciones) de z_i sobre el contexto inflado."""
    query, context = inflate_attention_kv(z_frames, i)
    q = torch.as_tensor(query, dtype=torch.float64)[None]
    kv = torch.as_tensor(context, dtype=torch.float64)[None]
    return F.scaled_dot_product_attention(q, kv, kv)[0].numpy()


def parse_substitutions(items: Optional[Sequence[str]]) -> Dict[str, str]:
    """'semantic=noise' ... -> {'semantic': 'noise'}; valida clave y valor."""
    substitutions: Dict[str, str] = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in SUBSTITUTIONS or value not in SUBSTITUTIONS[key]:
            options = [f"{k}={v}" for k, values in SUBSTITUTIONS.items() for v in values]
            raise ConfigError(f"Sustitución inválida {item!r}; opciones: {options}")
        substitutions[key] = value
    return substitutions


@dataclass
class Reconstructions:
    """Reconstrucciones de un split: frames N×f×3×H×W y tokens N×f×P×ancho."""

    frames: np.ndarray
    tokens: np.ndarray
    sample_ids: List[int]
    substitutions: Dict[str, str] = field(default_factory=dict)
    meta: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.sample_ids)

    def clip(self, index: int) -> VideoClip:
        return VideoClip(sample_id=self.sample_ids[index], frames=self.frames[index])


def reconstruct_dataset(dataset: VideoDataset, states: Mapping[str, Any], tokenizer, backend, config,
                        substitutions: Optional[Mapping[str, str]] = None,
                        seed: Optional[int] = None) -> Reconstructions:
    """
    Cadena completa fMRI -> features -> video para un split.

    Args:
        dataset: Split a reconstruir (fMRI preparado)
        states: {'semantic', 'structure', 'cmg'} y 'perframe' si motion=mlp
        tokenizer: FrameTokenizer
        backend: FrameGeneratorBackend
        config: RunConfig (smoothing_steps, inversion_steps, seed)
        substitutions: Ablaciones: semantic=noise, structure=noise, motion=noise|mlp
        seed: Semilla maestra (por defecto config.seed)

    Returns:
        Reconstructions
    """
    substitutions = dict(substitutions or {})
    seed = config.seed if seed is None else seed
    semantic: SemanticDecoderState = states["semantic"]
    structure: StructureDecoderState = states["structure"]
    cmg: CmgState = states["cmg"]
    perframe: Optional[PerFrameMlpState] = states.get("perframe")
    if substitutions.get("motion") == "mlp" and perframe is None:
        raise GenerationError("motion=mlp requiere el estado del baseline por frame")

    patch = cmg.config.patch_size
    frame_size = dataset.frame_size
    n_frames = dataset.manifest.frames_per_clip
    rng = np.random.default_rng([seed, 7])

    _, conditions = decode_semantic(semantic, dataset.fmri)
    first_latents = decode_structure(structure, dataset.fmri)
    if substitutions.get("semantic") == "noise":
        conditions = rng.standard_normal(conditions.shape).astype(np.float32)
    if substitutions.get("structure") == "noise":
        first_latents = rng.standard_normal(first_latents.shape).astype(np.float32)

    all_frames, all_tokens = [], []
    for index in progress(range(len(dataset)), "reconstruct", len(dataset)):
        fmri = dataset.fmri[index]
        motion = substitutions.get("motion")
        if motion == "mlp":
            first_tokens = tokenizer.tokenize(first_latents[index], patch)
            tokens = predict_perframe(perframe, first_tokens, fmri)
        else:
            tokens = generate_motion(cmg, first_latents[index], fmri, tokenizer, n_frames)
            if motion == "noise":
                tokens = np.concatenate([tokens[:1], rng.standard_normal(tokens[1:].shape)]).astype(np.float32)

        request = GenerationRequest(condition=conditions[index], motion_tokens=tokens,
                                    smoothing_steps=config.smoothing_steps,
                                    inversion_steps=config.inversion_steps, seed=seed + index)
        try:
            clip = reconstruct_video(request, backend, tokenizer, patch, frame_size, sample_id=index)
        except GenerationError as e:
            raise GenerationError(f"muestra {index}: {e}", frame_index=e.frame_index) from e
        all_frames.append(clip.frames)
        all_tokens.append(tokens)

    logger.info("✅ %d clips reconstruidos (sustituciones: %s)", len(dataset), substitutions or "ninguna")
    return Reconstructions(frames=np.stack(all_frames), tokens=np.stack(all_tokens).astype(np.float32),
                           sample_ids=list(range(len(dataset))), substitutions=substitutions,
                           meta={"patch_size": patch, "frame_size": list(frame_size)})


def ground_truth_reconstructions(dataset: VideoDataset, tokenizer, backend, patch_size: int,
                                 config) -> Reconstructions:
    """Techo de ruido: los features verdaderos del test pasan por el generador."""
    frame_size = dataset.frame_size
    all_frames, all_tokens = [], []
    for index in range(len(dataset)):
        tokens = tokenizer.frames_to_tokens(dataset.frames[index], patch_size)
        request = GenerationRequest(condition=np.zeros((20, 768), dtype=np.float32), motion_tokens=tokens,
                                    smoothing_steps=config.smoothing_steps,
                                    inversion_steps=config.inversion_steps, seed=config.seed + index)
        all_frames.append(reconstruct_video(request, backend, tokenizer, patch_size, frame_size, index).frames)
        all_tokens.append(tokens)
    return Reconstructions(frames=np.stack(all_frames), tokens=np.stack(all_tokens).astype(np.float32),
                           sample_ids=list(range(len(dataset))), substitutions={"features": "ground_truth"},
                           meta={"patch_size": patch_size, "frame_size": list(frame_size)})


def write_reconstructions(directory: Union[str, Path], recon: Reconstructions,
                          meta: Optional[Mapping[str, Any]] = None) -> Path:
    """
    Escribe las reconstrucciones:

        <dir>/manifest.json, frames.u8, tokens.f4       (todo el split)
        <dir>/sample_XXXX/frame_XX.png + manifest.json   (por muestra)
    """
    directory = Path(directory)
    frames_u8 = frames_to_u8(recon.frames)
    for position, sample_id in enumerate(recon.sample_ids):
        sample_dir = directory / SAMPLE_DIR.format(sample_id)
        sample_dir.mkdir(parents=True, exist_ok=True)
        for frame_index, frame in enumerate(frames_u8[position]):
            image = Image.fromarray(np.ascontiguousarray(frame.transpose(1, 2, 0)))
            image.save(sample_dir / FRAME_FILE.format(frame_index), format="PNG")
        write_json(sample_dir / "manifest.json", {
            "sample_id": sample_id,
            "frames": [FRAME_FILE.format(i) for i in range(frames_u8.shape[1])],
            "token_shape": list(recon.tokens.shape[2:]),
        })

    manifest = {"kind": RECONSTRUCTION_KIND, "sample_ids": list(recon.sample_ids),
                "substitutions": dict(recon.substitutions), **recon.meta, **(meta or {})}
    path = write_arrays(directory, {"frames": frames_u8, "tokens": recon.tokens}, manifest)
    logger.info("💾 Reconstrucciones guardadas en %s", directory)
    return path


def read_reconstructions(directory: Union[str, Path]) -> Reconstructions:
    meta, arrays = read_arrays(directory)
    if meta.get("kind") != RECONSTRUCTION_KIND:
        raise GenerationError(f"{directory} no contiene reconstrucciones (kind={meta.get('kind')!r})")
    sample_ids = [int(i) for i in meta.pop("sample_ids")]
    substitutions = dict(meta.pop("substitutions", {}))
    meta.pop("kind")
    meta.pop("arrays", None)
    logger.info("📂 %d reconstrucciones leídas de %s", len(sample_ids), directory)
    return Reconstructions(frames=frames_from_u8(arrays["frames"]), tokens=arrays["tokens"],
                           sample_ids=sample_ids, substitutions=substitutions, meta=meta)


def read_frame_png(path: Union[str, Path]) -> np.ndarray:
    """PNG 8-bit -> frame 3×H×W float32 en [0,1]."""
    with Image.open(path) as image:
        array = np.asarray(image.convert("RGB"))
    return frames_from_u8(array.transpose(2, 0, 1))


def sample_manifest(directory: Union[str, Path], sample_id: int) -> Dict[str, Any]:
    return read_json(Path(directory) / SAMPLE_DIR.format(sample_id) / "manifest.json")
