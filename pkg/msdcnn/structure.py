"""
msdcnn/structure.py
Calculadoras estructurales: número de kernels de medida, campo receptivo,
formas de todos los parámetros y recuento de parámetros.
"""

import math
from collections import OrderedDict
from enum import Enum
from typing import Dict, Tuple

from msdcnn.models import BASE_KERNEL, NetworkConfig
from tensor_core.errors import ConfigError, GeometryError

Shape = Tuple[int, ...]


class ParamScope(Enum):
    MFE_ONLY = "mfe"
    FULL = "full"


def measurement_kernel_count(measurement_rate: float, block_size: int) -> int:
    """n = ⌊MR·B²⌋, como mínimo 1."""
    if not 0.0 < measurement_rate <= 1.0:
        raise ConfigError(f"measurement_rate must lie in (0, 1], got {measurement_rate}")
    if block_size < 1:
        raise ConfigError(f"block_size must be >= 1, got {block_size}")
    # 1e-9 absorbe errores de representación como 0.29·100 = 28.999...
    return max(1, math.floor(measurement_rate * block_size * block_size + 1e-9))


def receptive_field(d: int) -> int:
    """Extensión (2d+1) de un kernel base 3×3 con dilatación d."""
    if d < 1:
        raise GeometryError(f"dilation factor must be >= 1, got {d}")
    return (BASE_KERNEL - 1) * d + 1


def channel_receptive_field(config: NetworkConfig, channel: int) -> int:
    """Campo receptivo acumulado de las L capas de un canal sobre X₁."""
    return 1 + sum(layer.extent - 1 for layer in config.channel_layers(channel))


# ============================================================
# FORMAS Y RECUENTO
# ============================================================

def mfe_param_name(channel: int, layer: int, part: str) -> str:
    return f"mfe.{channel}.{layer}.{part}"


def param_shapes(config: NetworkConfig) -> Dict[str, Shape]:
    """Forma de cada parámetro con nombre, en el orden canónico del checkpoint."""
    n = measurement_kernel_count(config.measurement_rate, config.block_size)
    B, F, hk = config.block_size, config.filters_per_layer, config.head_kernel
    shapes: Dict[str, Shape] = OrderedDict()
    shapes["measurement.weight"] = (n, 1, B, B)
    shapes["deconv.weight"] = (n, 1, B, B)
    shapes["deconv.bias"] = (1,)
    for c in range(1, config.mfe_channels + 1):
        in_ch = 1
        for l, layer in enumerate(config.channel_layers(c), 1):
            shapes[mfe_param_name(c, l, "weight")] = (F, in_ch, layer.kernel, layer.kernel)
            shapes[mfe_param_name(c, l, "bias")] = (F,)
            in_ch = F
    shapes["fusion.weight"] = (config.fusion_filters, config.mfe_channels * F, hk, hk)
    shapes["fusion.bias"] = (config.fusion_filters,)
    shapes["head.weight"] = (1, config.fusion_filters, hk, hk)
    shapes["head.bias"] = (1,)
    return shapes


def count_parameters(config: NetworkConfig, scope: ParamScope = ParamScope.MFE_ONLY) -> int:
    """
    mfe_only: pesos de las capas del MFE (sin bias). Las dilatadas cuentan sus
    K² taps, no la extensión inflada.
    full: todos los parámetros, bias incluidos.
    """
    total = 0
    for name, shape in param_shapes(config).items():
        if scope is ParamScope.MFE_ONLY and not (name.startswith("mfe.") and name.endswith(".weight")):
            continue
        total += math.prod(shape)
    return total
