"""
Jerarquía de excepciones de MindKit.

Todas las excepciones propias heredan de MindKitError para que la CLI pueda
traducirlas a códigos de salida (1 = validación, 2 = fallo en ejecución).
"""

from typing import Optional


class MindKitError(Exception):
    """Excepción base de MindKit."""
    exit_code = 2


class ConfigError(MindKitError):
    """Configuración inválida (claves desconocidas, tipos o rangos)."""
    exit_code = 1


class MissingArtifactError(MindKitError):
    """Falta el artefacto de una etapa previa."""
    exit_code = 1

    def __init__(self, stage: str, path: str, command: str):
        self.stage = stage
        self.path = path
        self.command = command
        super().__init__(
            f"Falta el artefacto de la etapa '{stage}' en {path}. "
            f"Ejecute primero: {command}"
        )


class DatasetError(MindKitError):
    """Errores de lectura, escritura o preprocesamiento de datasets."""


class TableError(MindKitError):
    """Errores de lectura de tablas CSV/XLSX."""


class EncoderError(MindKitError):
    """Errores de los backends de embedding y tokenización."""


class DecoderError(MindKitError):
    """Errores de los decodificadores semántico y estructural."""


class MotionGeneratorError(MindKitError):
    """Errores del generador de movimiento (CMG)."""


class GenerationError(MindKitError):
    """Errores en la etapa característica -> video."""

    def __init__(self, message: str, frame_index: Optional[int] = None):
        self.frame_index = frame_index
        if frame_index is not None:
            message = f"[frame {frame_index}] {message}"
        super().__init__(message)


class MetricError(MindKitError):
    """Errores en el cálculo de métricas."""


class AnalysisError(MindKitError):
    """Errores en los análisis de interpretabilidad."""


class TrainingError(MindKitError):
    """El entrenamiento divergió o produjo una pérdida no finita."""

    def __init__(self, message: str, epoch: int, step: int, last_finite_loss: Optional[float]):
        self.epoch = epoch
        self.step = step
        self.last_finite_loss = last_finite_loss
        super().__init__(
            f"{message} (época {epoch}, paso {step}, última pérdida finita: {last_finite_loss})"
        )
