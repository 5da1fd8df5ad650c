"""
tensor_core/tensor.py
Tipos básicos: Tensor de rango 4 (n, c, h, w), especificación de convolución
y la caché que conecta cada forward con su backward.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from tensor_core.errors import CacheError, DimensionError, GeometryError

Dims = Tuple[int, int, int, int]

AXES = ("batch", "channels", "height", "width")


# ============================================================
# TENSOR
# ============================================================

@dataclass
class Tensor:
    """
    Array real de rango 4 en orden (n, c, h, w), row-major, con hueco
    opcional para el gradiente.
    """
    data: np.ndarray
    grad: Optional[np.ndarray] = None

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 4:
            raise DimensionError("rank", 4, self.data.ndim, "Tensor")
        if not np.issubdtype(self.data.dtype, np.floating):
            self.data = self.data.astype(np.float64)
        if self.grad is not None and self.grad.shape != self.data.shape:
            raise DimensionError("grad", self.data.shape, self.grad.shape, "Tensor")

    @property
    def dims(self) -> Dims:
        return tuple(int(d) for d in self.data.shape)  # type: ignore[return-value]

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @classmethod
    def zeros(cls, dims: Dims, dtype=np.float64) -> "Tensor":
        return cls(np.zeros(dims, dtype=dtype))

    @classmethod
    def from_image(cls, image: np.ndarray, dtype=np.float64) -> "Tensor":
        """Envuelve una imagen 2D (h, w) como 1×1×h×w."""
        image = np.asarray(image, dtype=dtype)
        if image.ndim != 2:
            raise DimensionError("rank", 2, image.ndim, "from_image")
        return cls(image[None, None, :, :])

    def image(self, index: int = 0) -> np.ndarray:
        """Devuelve el plano (h, w) del elemento `index`, canal 0."""
        return self.data[index, 0]


def check_same_dims(a: Dims, b: Dims, context: str) -> None:
    """Lanza DimensionError con el primer eje que difiere."""
    for axis, x, y in zip(AXES, a, b):
        if x != y:
            raise DimensionError(axis, x, y, context)


# ============================================================
# ESPECIFICACIÓN DE CONVOLUCIÓN
# ============================================================

@dataclass(frozen=True)
class ConvSpec:
    """Hiperparámetros de una convolución 2D (correlación cruzada, sin volteo)."""
    out_channels: int
    in_channels: int
    kernel_h: int
    kernel_w: int
    stride: int = 1
    dilation: int = 1
    padding: int = 0
    has_bias: bool = True
    has_relu: bool = False

    def __post_init__(self):
        for name in ("out_channels", "in_channels", "kernel_h", "kernel_w", "stride", "dilation"):
            if getattr(self, name) < 1:
                raise GeometryError(f"ConvSpec.{name} must be >= 1, got {getattr(self, name)}")
        if self.padding < 0:
            raise GeometryError(f"ConvSpec.padding must be >= 0, got {self.padding}")

    @property
    def extent_h(self) -> int:
        return self.dilation * (self.kernel_h - 1) + 1

    @property
    def extent_w(self) -> int:
        return self.dilation * (self.kernel_w - 1) + 1

    @property
    def weight_dims(self) -> Dims:
        return (self.out_channels, self.in_channels, self.kernel_h, self.kernel_w)

    def output_hw(self, h: int, w: int) -> Tuple[int, int]:
        """⌊(h + 2p − extent)/stride⌋ + 1 en cada eje."""
        ph, pw = h + 2 * self.padding, w + 2 * self.padding
        if self.extent_h > ph:
            raise GeometryError(f"effective kernel height {self.extent_h} exceeds padded input height {ph}")
        if self.extent_w > pw:
            raise GeometryError(f"effective kernel width {self.extent_w} exceeds padded input width {pw}")
        return (ph - self.extent_h) // self.stride + 1, (pw - self.extent_w) // self.stride + 1

    @classmethod
    def same(cls, in_channels: int, out_channels: int, kernel: int, dilation: int = 1,
             has_relu: bool = True) -> "ConvSpec":
        """Capa 'same' (stride 1) con relleno de ceros: p = d·(K−1)/2."""
        if kernel % 2 == 0:
            raise GeometryError(f"'same' convolution needs an odd kernel, got {kernel}")
        return cls(out_channels, in_channels, kernel, kernel, stride=1, dilation=dilation,
                   padding=dilation * (kernel - 1) // 2, has_bias=True, has_relu=has_relu)


# ============================================================
# CACHÉ DE CAPA
# ============================================================

class OpKind(Enum):
    CONV2D = "conv2d"
    CONV_TRANSPOSE2D = "conv_transpose2d"
    RELU = "relu"
    CONCAT = "concat"


@dataclass
class LayerCache:
    """
    Lo que el backward necesita de su forward. Es de un solo uso: tras el
    backward queda consumida.
    """
    op: OpKind
    input: Tensor
    output_dims: Dims
    spec: Optional[ConvSpec] = None
    weights: Optional[np.ndarray] = None
    has_bias: bool = False
    extra: Dict[str, Any] = field(default_factory=dict)
    consumed: bool = False

    def claim(self, op: OpKind, grad_dims: Dims) -> None:
        """Valida que la caché corresponde al backward pedido y la marca como usada."""
        if self.op is not op:
            raise CacheError(f"cache produced by {self.op.value} cannot feed {op.value} backward")
        if self.consumed:
            raise CacheError(f"stale {op.value} cache: backward already consumed it")
        check_same_dims(self.output_dims, grad_dims, f"{op.value} backward grad_out")
        self.consumed = True
