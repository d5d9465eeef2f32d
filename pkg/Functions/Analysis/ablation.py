"""
Ablaciones del generador de movimiento:

    guidance_ablation     CMG con cross-attention al fMRI vs. self-attention espacial
    cmg_motion_ablation   CMG vs. baseline de MLPs por frame (sin modelo de movimiento)
    variant_ablation      curvas de entrenamiento de las cuatro variantes de fusión

Todos los brazos usan el mismo presupuesto y la misma semilla de
inicialización. Las dos primeras comparan EPE pareado sobre los mismos clips
de test, con el primer frame tomado del ground truth para aislar el modelo de
movimiento.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from Functions.DataIO.dataset import VideoDataset
from Functions.errors import AnalysisError
from Functions.Evaluation.metrics import epe
from Functions.Generator.VideoGenerator import GenerationRequest, reconstruct_video
from Functions.MotionGenerator import (
    VARIANTS,
    CmgState,
    PerFrameMlpState,
    generate_motion,
    predict_perframe,
    train_cmg,
    train_perframe,
)

logger = logging.getLogger(__name__)


@dataclass
class AblationResult:
    name: str
    sample_ids: List[int]
    arms: Dict[str, List[float]]
    seed: int
    extra: Dict[str, Any] = field(default_factory=dict)
    metric: str = "epe"

    def mean(self, arm: str) -> float:
        return float(np.mean(self.arms[arm]))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name, "seed": self.seed, "metric": self.metric, "sample_ids": list(self.sample_ids),
            "arms": {arm: list(values) for arm, values in self.arms.items()},
            "means": {arm: self.mean(arm) for arm in self.arms},
            **self.extra,
        }


def _frames_from_tokens(tokens: np.ndarray, tokenizer, backend, patch_size: int, dataset: VideoDataset,
                        seed: int) -> np.ndarray:
    request = GenerationRequest(condition=np.zeros((20, 768), dtype=np.float32), motion_tokens=tokens,
                                smoothing_steps=0, inversion_steps=0, seed=seed)
    return reconstruct_video(request, backend, tokenizer, patch_size, dataset.frame_size).frames


def cmg_epe(state: CmgState, test: VideoDataset, tokenizer, backend, flow_backend, seed: int = 0) -> List[float]:
    """EPE por muestra del CMG partiendo del primer frame verdadero."""
    errors = []
    for index in range(len(test)):
        latent = tokenizer.encode(test.frames[index, 0])
        tokens = generate_motion(state, latent, test.fmri[index], tokenizer, test.manifest.frames_per_clip)
        frames = _frames_from_tokens(tokens, tokenizer, backend, state.config.patch_size, test, seed + index)
        errors.append(epe(test.frames[index], frames, flow_backend))
    return errors


def perframe_epe(state: PerFrameMlpState, test: VideoDataset, tokenizer, backend, flow_backend,
                 seed: int = 0) -> List[float]:
    """EPE por muestra del baseline por frame partiendo del primer frame verdadero."""
    patch = state.config["patch_size"]
    errors = []
    for index in range(len(test)):
        first_tokens = tokenizer.frames_to_tokens(test.frames[index, 0], patch)
        tokens = predict_perframe(state, first_tokens, test.fmri[index])
        frames = _frames_from_tokens(tokens, tokenizer, backend, patch, test, seed + index)
        errors.append(epe(test.frames[index], frames, flow_backend))
    return errors


def guidance_ablation(train: VideoDataset, test: VideoDataset, tokenizer, backend, flow_backend, config,
                      seed: Optional[int] = None) -> AblationResult:
    """
    Entrena dos CMG que sólo difieren en el módulo espacial (cross-attention
    al fMRI vs. self-attention dentro del frame) y compara su EPE.

    Returns:
        AblationResult con brazos 'with_fmri' y 'without_fmri'
    """
    seed = config.seed if seed is None else seed
    if len(test) == 0:
        raise AnalysisError("guidance_ablation requiere clips de test")
    arms = {}
    for arm, guided in (("with_fmri", True), ("without_fmri", False)):
        logger.info("📊 Ablación de guía fMRI: brazo %s", arm)
        state = train_cmg(train, tokenizer, config, seed=seed, guided=guided)
        arms[arm] = cmg_epe(state, test, tokenizer, backend, flow_backend, seed)
    result = AblationResult(name="guidance", sample_ids=list(range(len(test))), arms=arms, seed=seed)
    logger.info("✅ EPE con fMRI %.3f / sin fMRI %.3f", result.mean("with_fmri"), result.mean("without_fmri"))
    return result


def cmg_motion_ablation(train: VideoDataset, test: VideoDataset, tokenizer, backend, flow_backend, config,
                        seed: Optional[int] = None, cmg_state: Optional[CmgState] = None,
                        perframe_state: Optional[PerFrameMlpState] = None) -> AblationResult:
    """
    CMG vs. n−1 MLPs independientes. Si se pasan estados ya entrenados se
    reutilizan; si no, se entrenan con la misma semilla y presupuesto.

    Returns:
        AblationResult con brazos 'cmg' y 'per_frame_mlp'
    """
    seed = config.seed if seed is None else seed
    if len(test) == 0:
        raise AnalysisError("cmg_motion_ablation requiere clips de test")
    if cmg_state is None:
        cmg_state = train_cmg(train, tokenizer, config, seed=seed)
    if perframe_state is None:
        perframe_state = train_perframe(train, tokenizer, config, seed=seed)
    arms = {
        "cmg": cmg_epe(cmg_state, test, tokenizer, backend, flow_backend, seed),
        "per_frame_mlp": perframe_epe(perframe_state, test, tokenizer, backend, flow_backend, seed),
    }
    result = AblationResult(name="motion", sample_ids=list(range(len(test))), arms=arms, seed=seed,
                            extra={"per_frame_mlps": len(perframe_state.model.mlps)})
    logger.info("✅ EPE CMG %.3f / MLP por frame %.3f", result.mean("cmg"), result.mean("per_frame_mlp"))
    return result


def variant_ablation(train: VideoDataset, tokenizer, config, seed: Optional[int] = None) -> AblationResult:
    """
    Entrena una CMG por variante de fusión espacio-temporal con la misma
    semilla y el mismo presupuesto, y guarda su pérdida de entrenamiento.

    Returns:
        AblationResult con un brazo por variante (pérdida por época) y la
        pérdida de la última época en extra['final_train_loss']
    """
    seed = config.seed if seed is None else seed
    if config.cmg_epochs < 1:
        raise AnalysisError("variant_ablation requiere al menos una época de CMG")
    arms = {}
    for variant in VARIANTS:
        logger.info("📊 Ablación de variantes: %s", variant)
        state = train_cmg(train, tokenizer, config, seed=seed, variant=variant)
        arms[variant] = [float(loss) for loss in state.history.column("train_loss")]
    final = {variant: losses[-1] for variant, losses in arms.items()}
    result = AblationResult(name="variants", sample_ids=[], arms=arms, seed=seed, metric="train_loss",
                            extra={"final_train_loss": final, "epochs": config.cmg_epochs})
    logger.info("✅ Pérdida final por variante: %s",
                ", ".join(f"{variant} {loss:.4f}" for variant, loss in final.items()))
    return result
