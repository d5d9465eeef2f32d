"""
Esquema de configuración de una corrida de MindKit (RunConfig).

Todas las claves tienen un valor por defecto; los hiperparámetros del pipeline
vienen precargados con los valores de referencia (alpha=0.5, lambda1=0.01, ...).
"""

import dataclasses
import hashlib
import json
import logging
import typing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

from Functions.errors import ConfigError
from .env_loader import load_env

logger = logging.getLogger(__name__)

BACKEND_KINDS = ("embedder", "tokenizer", "conditioner", "classifier", "flow", "generator")
CMG_VARIANTS = ("cross_attention", "adaLN", "temporal_cross", "temporal_adaLN")


@dataclass(frozen=True)
class RunConfig:
    """Configuración validada de una corrida."""

    # rutas (relativas a --out)
    dataset_path: str = "data"
    prepared_path: str = "prepared"
    roi_labels_path: str = ""
    roi_names_path: str = ""

    # backends por nombre de registro
    embedder: str = "toy"
    tokenizer: str = "toy"
    conditioner: str = "toy"
    classifier: str = "toy"
    flow: str = "toy"
    generator: str = "toy"

    seed: int = 0

    # dataset sintético
    synth_n_train: int = 500
    synth_n_test: int = 100
    synth_n_voxels: int = 512
    synth_height: int = 64
    synth_width: int = 64
    synth_noise: float = 0.1
    synth_max_speed: float = 2.0
    synth_n_signal_voxels: int = 0
    synth_repetitions: int = 2

    # preprocesamiento
    frames_per_clip: int = 8
    frame_hz: float = 4.0
    clip_seconds: float = 2.0
    tr_seconds: float = 2.0
    lag_seconds: float = 4.0
    voxel_k: int = 4500
    caption_threshold: float = 0.05

    # decodificador semántico
    alpha: float = 0.5
    lambda1: float = 0.01
    lambda2: float = 0.5
    tau_init: float = 0.07
    semantic_batch: int = 64
    semantic_lr: float = 2e-4
    semantic_epochs: int = 100
    semantic_hidden: int = 1024
    head_hidden: int = 1024
    val_fraction: float = 0.1
    aug_voxel_subset: float = 0.2
    aug_voxel_zero: float = 0.5
    aug_synonym: float = 0.5
    aug_insert: float = 0.2
    aug_swap: float = 0.2
    aug_delete: float = 0.2
    aug_crop_fraction: float = 400.0 / 512.0

    # decodificador estructural
    structure_batch: int = 64
    structure_lr: float = 1e-6
    structure_epochs: int = 100
    structure_warmup: int = 50
    structure_hidden: int = 1024

    # generador de movimiento (CMG)
    cmg_layers: int = 4
    cmg_d_token: int = 128
    cmg_heads: int = 8
    cmg_patch: int = 64
    cmg_mask_ratio: float = 0.6
    cmg_variant: str = "cross_attention"
    cmg_fmri_tokens: int = 8
    cmg_guidance: bool = True
    cmg_batch: int = 64
    cmg_lr: float = 4e-5
    cmg_epochs: int = 300
    cmg_warmup: int = 50
    perframe_hidden: int = 512
    divergence_factor: float = 1e3

    # característica -> video
    smoothing_steps: int = 250
    inversion_steps: int = 50

    # evaluación
    nway_n: int = 2
    nway_trials: int = 100
    n_boot: int = 100
    clip_gate: float = 0.6
    retrieval_k: Tuple[int, ...] = field(default=(1, 10, 100))

    # análisis
    n_shuffles: int = 100
    shuffle_repeats: int = 5

    def to_dict(self) -> Dict[str, Any]:
        """Dict serializable (tuplas como listas)."""
        data = dataclasses.asdict(self)
        data["retrieval_k"] = list(self.retrieval_k)
        return data

    def config_hash(self) -> str:
        """SHA-256 del JSON canónico de la configuración."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def replace(self, **changes: Any) -> "RunConfig":
        """Copia con cambios, validada."""
        return validate_config(dataclasses.replace(self, **changes))


_TYPE_HINTS = typing.get_type_hints(RunConfig)

_PROBABILITY_KEYS = ("alpha", "val_fraction", "aug_voxel_subset", "aug_voxel_zero", "aug_synonym",
                     "aug_insert", "aug_swap", "aug_delete", "caption_threshold")
_POSITIVE_KEYS = ("synth_n_train", "synth_n_test", "synth_n_voxels", "synth_height", "synth_width",
                  "frames_per_clip", "frame_hz", "clip_seconds", "tr_seconds", "voxel_k",
                  "tau_init", "semantic_batch", "semantic_lr", "semantic_hidden", "head_hidden",
                  "structure_batch", "structure_lr", "structure_hidden", "cmg_layers", "cmg_d_token",
                  "cmg_heads", "cmg_patch", "cmg_fmri_tokens", "cmg_batch", "cmg_lr", "perframe_hidden",
                  "divergence_factor", "nway_n", "nway_trials", "n_boot", "n_shuffles", "shuffle_repeats",
                  "synth_repetitions")
_NON_NEGATIVE_KEYS = ("lambda1", "lambda2", "synth_noise", "synth_max_speed", "synth_n_signal_voxels",
                      "lag_seconds", "semantic_epochs", "structure_epochs", "structure_warmup",
                      "cmg_epochs", "cmg_warmup", "smoothing_steps", "inversion_steps", "seed")


def _coerce(key: str, raw: Any, target: Any) -> Any:
    """Convierte un valor crudo (str del archivo o del entorno) al tipo del esquema."""
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    if target is bool:
        lowered = text.lower()
        if lowered in ("1", "true", "yes", "si", "sí", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"booleano inválido {raw!r}")
    if target is int:
        return int(float(text)) if "e" in text.lower() else int(text)
    if target is float:
        return float(text)
    if target is str:
        return text
    if typing.get_origin(target) is tuple:
        return tuple(int(part) for part in text.split(",") if part.strip())
    raise ValueError(f"tipo no soportado para {key}")


def validate_config(config: RunConfig) -> RunConfig:
    """
    Valida rangos y nombres. Junta todos los problemas en un único ConfigError.
    """
    problems = []
    for key in _PROBABILITY_KEYS:
        value = getattr(config, key)
        if not 0.0 <= value <= 1.0:
            problems.append(f"{key}={value} debe estar en [0, 1]")
    for key in _POSITIVE_KEYS:
        if getattr(config, key) <= 0:
            problems.append(f"{key}={getattr(config, key)} debe ser positivo")
    for key in _NON_NEGATIVE_KEYS:
        if getattr(config, key) < 0:
            problems.append(f"{key}={getattr(config, key)} no puede ser negativo")
    if not 0.0 <= config.cmg_mask_ratio < 1.0:
        problems.append(f"cmg_mask_ratio={config.cmg_mask_ratio} debe estar en [0, 1)")
    if not 0.0 < config.aug_crop_fraction <= 1.0:
        problems.append(f"aug_crop_fraction={config.aug_crop_fraction} debe estar en (0, 1]")
    if config.cmg_d_token % config.cmg_heads != 0:
        problems.append(f"cmg_d_token={config.cmg_d_token} debe ser divisible por cmg_heads={config.cmg_heads}")
    if config.cmg_variant not in CMG_VARIANTS:
        problems.append(f"cmg_variant={config.cmg_variant!r} no es una de {list(CMG_VARIANTS)}")
    if config.frames_per_clip < 2:
        problems.append(f"frames_per_clip={config.frames_per_clip} debe ser >= 2")
    if config.synth_height % 8 or config.synth_width % 8:
        problems.append("synth_height y synth_width deben ser múltiplos de 8")
    elif config.cmg_patch % 8 or config.synth_height % config.cmg_patch or config.synth_width % config.cmg_patch:
        problems.append(f"cmg_patch={config.cmg_patch} debe ser múltiplo de 8 y dividir "
                        f"{config.synth_height}×{config.synth_width}")
    if not config.retrieval_k or any(k <= 0 for k in config.retrieval_k):
        problems.append(f"retrieval_k={config.retrieval_k} debe contener enteros positivos")

    # los nombres de backend se validan contra el registro
    from Functions.Encoders.registry import registered_names
    for kind in BACKEND_KINDS:
        name = getattr(config, kind)
        if name not in registered_names(kind):
            problems.append(f"{kind}={name!r} no está registrado (disponibles: {registered_names(kind)})")

    if problems:
        raise ConfigError("Configuración inválida:\n  - " + "\n  - ".join(problems))
    return config


def build_config(values: Mapping[str, Any]) -> RunConfig:
    """
    Construye un RunConfig a partir de un dict clave -> valor crudo.

    Las claves se aceptan en mayúsculas (formato de archivo) o minúsculas.
    Claves desconocidas o valores no convertibles producen ConfigError.
    """
    kwargs: Dict[str, Any] = {}
    problems = []
    for raw_key, raw_value in values.items():
        key = raw_key.lower()
        if key not in _TYPE_HINTS:
            problems.append(f"clave desconocida {raw_key!r}")
            continue
        try:
            kwargs[key] = _coerce(key, raw_value, _TYPE_HINTS[key])
        except ValueError as e:
            problems.append(f"{raw_key}={raw_value!r}: {e}")
    if problems:
        raise ConfigError("Configuración inválida:\n  - " + "\n  - ".join(problems))
    return validate_config(RunConfig(**kwargs))


def load_run_config(config_path: Optional[Union[str, Path]] = None,
                    overrides: Optional[Mapping[str, str]] = None,
                    environ: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Carga la configuración: archivo -> variables MINDKIT_* -> overrides de la CLI.

    Args:
        config_path: Archivo clave=valor (opcional; sin archivo se usan los defaults)
        overrides: Pares clave/valor de --set, con prioridad máxima
        environ: Entorno a usar (por defecto os.environ)

    Returns:
        RunConfig validado
    """
    values: Dict[str, Any] = dict(load_env(config_path, environ=environ))
    for key, value in (overrides or {}).items():
        values[key.upper()] = value
    config = build_config(values)
    logger.info("✅ Configuración cargada (hash %s)", config.config_hash()[:12])
    return config


def config_from_json(data: Mapping[str, Any]) -> RunConfig:
    """Reconstruye un RunConfig desde la instantánea config.json de un artefacto."""
    data = dict(data)
    if "retrieval_k" in data:
        data["retrieval_k"] = tuple(data["retrieval_k"])
    return build_config(data)
