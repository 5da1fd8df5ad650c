"""
tensor_core/errors.py
Jerarquía de excepciones de todo el toolkit.

La librería solo lanza excepciones; la CLI es la única capa que las traduce
a códigos de salida.
"""

from typing import Any, Optional


class MsdcnnError(Exception):
    """Raíz de todos los errores de dominio."""


# ============================================================
# TENSORES Y CAPAS
# ============================================================

class DimensionError(MsdcnnError, ValueError):
    """Dimensiones incompatibles. Nombra el eje culpable."""

    def __init__(self, axis: str, expected: Any, got: Any, context: str = ""):
        self.axis = axis
        self.expected = expected
        self.got = got
        prefix = f"{context}: " if context else ""
        super().__init__(f"{prefix}dimension mismatch on axis '{axis}': expected {expected}, got {got}")


class GeometryError(MsdcnnError, ValueError):
    """Geometría imposible (kernel más grande que la entrada, tamaños no múltiplos de B...)."""


class CacheError(MsdcnnError, RuntimeError):
    """LayerCache usada con un backward que no corresponde a su forward."""


class GradientCheckError(MsdcnnError, ArithmeticError):
    """Valor no finito durante una comprobación por diferencias finitas."""

    def __init__(self, parameter: str, index: int, message: str):
        self.parameter = parameter
        self.index = index
        super().__init__(f"{message} (parameter '{parameter}', flat index {index})")


# ============================================================
# CONFIGURACIÓN Y ENTRENAMIENTO
# ============================================================

class ConfigError(MsdcnnError, ValueError):
    """Configuración inválida."""


class NonFiniteGradientError(MsdcnnError, ArithmeticError):
    """Gradiente NaN/Inf detectado antes de aplicar un paso de Adam."""

    def __init__(self, parameter: str):
        self.parameter = parameter
        super().__init__(f"non-finite gradient for parameter '{parameter}', step aborted")


class TrainingDivergedError(MsdcnnError, ArithmeticError):
    """La pérdida dejó de ser finita. Lleva el último checkpoint sano."""

    def __init__(self, epoch: int, step: int, last_good: Optional[Any] = None):
        self.epoch = epoch
        self.step = step
        self.last_good = last_good
        super().__init__(f"loss became non-finite at epoch {epoch}, step {step}")


# ============================================================
# REFERENCIA CS
# ============================================================

class RipBudgetError(MsdcnnError, ValueError):
    """Demasiados soportes para la enumeración exhaustiva del RIP."""


class OrthonormalityError(MsdcnnError, ValueError):
    """La base Ψ no es ortonormal."""


# ============================================================
# ENTRADA / SALIDA
# ============================================================

class ImageFormatError(MsdcnnError):
    """Error base de lectura de imágenes."""


class UnsupportedImageFormatError(ImageFormatError):
    """Formato de imagen no soportado."""


class TruncatedImageError(ImageFormatError):
    """El fichero de imagen acaba antes de lo que anuncia su cabecera."""


class ManifestError(MsdcnnError):
    """Manifiesto de dataset inválido o vacío."""


class CheckpointError(MsdcnnError):
    """Error base del formato de checkpoint."""


class BadMagicError(CheckpointError):
    """Los 4 primeros bytes no son 'MSDC'."""


class VersionMismatchError(CheckpointError):
    """Versión de formato desconocida."""


class CheckpointDimensionError(CheckpointError):
    """Un tensor no tiene las dimensiones que exige la configuración embebida."""


class TruncatedCheckpointError(CheckpointError):
    """El fichero termina antes de tiempo."""
