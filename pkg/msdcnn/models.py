"""
msdcnn/models.py
Modelos de datos de la red: tipos de capa del MFE, patrones por canal y
NetworkConfig con los hiperparámetros estructurales por defecto.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Tuple

from tensor_core.errors import ConfigError


# ============================================================
# ENUMERACIONES
# ============================================================

class LayerKind(Enum):
    """Tipo de capa dentro de un canal del MFE."""
    DILATED = "D"  # 3×3 con factor de dilatación d
    NORMAL = "N"   # convolución normal (2d+1)×(2d+1)


class MfePattern(Enum):
    """Patrones de capa para los canales con d > 1."""
    ALTERNATING = "alternating"  # D, N, D, N ...
    DILATED = "dilated"          # todas dilatadas
    CONV = "conv"                # todas normales


# ============================================================
# CAPA DEL MFE
# ============================================================

BASE_KERNEL = 3


@dataclass(frozen=True)
class MfeLayer:
    """Una capa concreta: tipo + factor de dilatación del canal."""
    kind: LayerKind
    dilation: int

    @property
    def kernel(self) -> int:
        """Tamaño del kernel almacenado (K): 3 si es dilatada, 2d+1 si es normal."""
        if self.kind is LayerKind.DILATED:
            return BASE_KERNEL
        return 2 * self.dilation + 1

    @property
    def conv_dilation(self) -> int:
        return self.dilation if self.kind is LayerKind.DILATED else 1

    @property
    def extent(self) -> int:
        """Extensión efectiva: igual para los dos tipos dentro de un canal."""
        return self.conv_dilation * (self.kernel - 1) + 1


def pattern_kinds(pattern: MfePattern, layers: int) -> Tuple[LayerKind, ...]:
    if pattern is MfePattern.ALTERNATING:
        return tuple(LayerKind.DILATED if i % 2 == 0 else LayerKind.NORMAL for i in range(layers))
    if pattern is MfePattern.DILATED:
        return (LayerKind.DILATED,) * layers
    return (LayerKind.NORMAL,) * layers


def encode_patterns(patterns: Tuple[Tuple[LayerKind, ...], ...]) -> str:
    """(('D','N',...), ...) -> 'DNDN/DNDN'."""
    return "/".join("".join(k.value for k in channel) for channel in patterns)


def decode_patterns(text: str) -> Tuple[Tuple[LayerKind, ...], ...]:
    try:
        return tuple(tuple(LayerKind(ch) for ch in channel.strip().upper()) for channel in text.split("/"))
    except ValueError:
        raise ConfigError(f"invalid channel_patterns '{text}': use D/N tokens, channels separated by '/'")


# ============================================================
# CONFIGURACIÓN DE LA RED
# ============================================================

MAX_MFE_CHANNELS = 3


@dataclass(frozen=True)
class NetworkConfig:
    """
    Hiperparámetros estructurales de la MsDCNN.

    El canal i (1-indexado) usa dilatación d = i; sus capas normales usan
    kernel 2d+1, de modo que todas las capas del canal tienen la misma
    extensión. Con L = 4 la red de reconstrucción tiene 1 + 4 + 2 = 7 capas.
    """
    measurement_rate: float = 0.10
    block_size: int = 32
    mfe_channels: int = 3
    layers_per_channel: int = 4
    filters_per_layer: int = 32
    channel_patterns: Tuple[Tuple[LayerKind, ...], ...] = field(default=())
    fusion_filters: int = 32
    head_kernel: int = 3

    def __post_init__(self):
        if not self.channel_patterns:
            object.__setattr__(self, "channel_patterns", tuple(
                pattern_kinds(MfePattern.ALTERNATING, self.layers_per_channel) for _ in range(self.mfe_channels)))
        self.validate()

    def validate(self) -> None:
        if not 0.0 < self.measurement_rate <= 1.0:
            raise ConfigError(f"measurement_rate must lie in (0, 1], got {self.measurement_rate}")
        if self.block_size < 1:
            raise ConfigError(f"block_size must be >= 1, got {self.block_size}")
        if not 1 <= self.mfe_channels <= MAX_MFE_CHANNELS:
            raise ConfigError(f"mfe_channels must be 1..{MAX_MFE_CHANNELS}, got {self.mfe_channels}")
        for name in ("layers_per_channel", "filters_per_layer", "fusion_filters", "head_kernel"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.head_kernel % 2 == 0:
            raise ConfigError(f"head_kernel must be odd, got {self.head_kernel}")
        if len(self.channel_patterns) != self.mfe_channels:
            raise ConfigError(
                f"channel_patterns has {len(self.channel_patterns)} channels, mfe_channels is {self.mfe_channels}")
        for idx, channel in enumerate(self.channel_patterns, 1):
            if len(channel) != self.layers_per_channel:
                raise ConfigError(
                    f"channel {idx} pattern has {len(channel)} layers, layers_per_channel is {self.layers_per_channel}")

    def channel_layers(self, channel: int) -> Tuple[MfeLayer, ...]:
        """Capas del canal `channel` (1-indexado)."""
        return tuple(MfeLayer(kind, channel) for kind in self.channel_patterns[channel - 1])

    @classmethod
    def with_pattern(cls, pattern: MfePattern, mfe_channels: int, **kwargs) -> "NetworkConfig":
        """
        Aplica `pattern` a los canales con d > 1. El canal 1 es siempre una CNN
        3×3 normal (dilatada d=1 y normal 3×3 son la misma capa).
        """
        layers = kwargs.get("layers_per_channel", cls.layers_per_channel)
        patterns = [pattern_kinds(MfePattern.ALTERNATING, layers)]
        patterns += [pattern_kinds(pattern, layers) for _ in range(mfe_channels - 1)]
        return cls(mfe_channels=mfe_channels, channel_patterns=tuple(patterns), **kwargs)


# Variantes de los experimentos de ablación
PRESETS: Dict[str, Tuple[int, MfePattern]] = {
    "msdcnn-1": (1, MfePattern.ALTERNATING),
    "msdcnn-2": (2, MfePattern.ALTERNATING),
    "msdcnn-3": (3, MfePattern.ALTERNATING),
    "msdcnn-2d": (2, MfePattern.DILATED),
    "msdcnn-2c": (2, MfePattern.CONV),
}


def preset(name: str, **kwargs) -> NetworkConfig:
    try:
        channels, pattern = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset '{name}'. Valid presets: {', '.join(PRESETS)}")
    return NetworkConfig.with_pattern(pattern, channels, **kwargs)
