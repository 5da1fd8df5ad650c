"""
msdcnn/network.py
MsDCNN ensamblada a partir de las capas de tensor_core:

    X --medida conv (B×B, stride B, sin bias)--> Y
      --deconv (B×B, stride B, con bias)--> X₁
      --MFE: C canales paralelos de L capas + ReLU--> F₁..F_C
      --concat--> --conv w_s + ReLU--> --conv w_l (lineal)--> X*
"""

import logging
import zlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from msdcnn.models import NetworkConfig
from msdcnn.structure import measurement_kernel_count, mfe_param_name, param_shapes
from tensor_core import layers
from tensor_core.errors import DimensionError, GeometryError
from tensor_core.tensor import ConvSpec, LayerCache, Tensor
from training.initializers import he_init

logger = logging.getLogger(__name__)


# ============================================================
# RED
# ============================================================

@dataclass
class Network:
    """Configuración + conjunto de parámetros Θ con nombre."""
    config: NetworkConfig
    params: Dict[str, np.ndarray]

    @property
    def dtype(self) -> np.dtype:
        return self.params["measurement.weight"].dtype

    @property
    def n_measurements(self) -> int:
        return measurement_kernel_count(self.config.measurement_rate, self.config.block_size)

    def measurement_spec(self) -> ConvSpec:
        B = self.config.block_size
        return ConvSpec(self.n_measurements, 1, B, B, stride=B, has_bias=False, has_relu=False)

    def mfe_spec(self, channel: int, layer: int) -> ConvSpec:
        mfe_layer = self.config.channel_layers(channel)[layer - 1]
        in_ch = 1 if layer == 1 else self.config.filters_per_layer
        return ConvSpec.same(in_ch, self.config.filters_per_layer, mfe_layer.kernel,
                             dilation=mfe_layer.conv_dilation, has_relu=True)

    def fusion_spec(self) -> ConvSpec:
        c = self.config
        return ConvSpec.same(c.mfe_channels * c.filters_per_layer, c.fusion_filters, c.head_kernel, has_relu=True)

    def head_spec(self) -> ConvSpec:
        return ConvSpec.same(self.config.fusion_filters, 1, self.config.head_kernel, has_relu=False)


def _fan_in(name: str, shape: Tuple[int, ...]) -> int:
    if len(shape) < 4:
        # bias: se inicializa a cero, el fan-in no interviene
        return 1
    if name == "measurement.weight":
        return shape[2] * shape[3]
    if name == "deconv.weight":
        # cada píxel de X₁ recibe exactamente n contribuciones (kernel == stride)
        return shape[0]
    return shape[1] * shape[2] * shape[3]


def param_seed(seed: int, name: str) -> List[int]:
    """Semilla por parámetro: los canales compartidos coinciden entre redes con distinto C."""
    return [seed, zlib.crc32(name.encode("utf-8"))]


def build_network(config: NetworkConfig, seed: int, dtype=np.float64) -> Network:
    """Construye Θ con inicialización He; misma semilla -> mismos bytes."""
    params: Dict[str, np.ndarray] = {}
    for name, shape in param_shapes(config).items():
        params[name] = he_init(shape, _fan_in(name, shape), param_seed(seed, name),
                               is_bias=name.endswith(".bias"), dtype=dtype)
    logger.debug(f"Built network with {len(params)} tensors (seed={seed}, dtype={np.dtype(dtype).name})")
    return Network(config, params)


# ============================================================
# TRAZA DEL FORWARD
# ============================================================

@dataclass
class ForwardTrace:
    """Cachés de todas las capas de un forward, en orden."""
    measure: LayerCache
    deconv: LayerCache
    mfe: List[List[Tuple[LayerCache, LayerCache]]] = field(default_factory=list)
    concat: Optional[LayerCache] = None
    fusion: Optional[LayerCache] = None
    fusion_relu: Optional[LayerCache] = None
    head: Optional[LayerCache] = None

    def relu_caches(self) -> List[LayerCache]:
        caches = [relu_cache for channel in self.mfe for _, relu_cache in channel]
        if self.fusion_relu is not None:
            caches.append(self.fusion_relu)
        return caches


def min_relu_margin(trace: ForwardTrace) -> float:
    """Menor |pre-activación| de todas las ReLU: distancia al pliegue más cercano."""
    return min(float(np.min(np.abs(c.input.data))) for c in trace.relu_caches())


# ============================================================
# PASOS DEL FORWARD
# ============================================================

def _cast(net: Network, t: Tensor) -> Tensor:
    return t if t.dtype == net.dtype else Tensor(t.data.astype(net.dtype))


def _measure(net: Network, image: Tensor) -> Tuple[Tensor, LayerCache]:
    n, c, h, w = image.dims
    B = net.config.block_size
    if c != 1:
        raise DimensionError("channels", 1, c, "measure (grayscale only)")
    if h % B or w % B:
        raise GeometryError(
            f"image {h}x{w} is not a multiple of block size {B}; pad it first with data_io.pad_to_multiple")
    return layers.conv2d(_cast(net, image), net.params["measurement.weight"], None, net.measurement_spec())


def _initial_reconstruct(net: Network, Y: Tensor) -> Tuple[Tensor, LayerCache]:
    if Y.dims[1] != net.n_measurements:
        raise DimensionError("channels", net.n_measurements, Y.dims[1], "initial_reconstruct")
    return layers.conv_transpose2d(_cast(net, Y), net.params["deconv.weight"], net.params["deconv.bias"],
                                   net.config.block_size)


def _mfe_channel(net: Network, channel: int, x1: Tensor) -> Tuple[Tensor, List[Tuple[LayerCache, LayerCache]]]:
    caches = []
    x = x1
    for layer in range(1, net.config.layers_per_channel + 1):
        z, conv_cache = layers.conv2d(x, net.params[mfe_param_name(channel, layer, "weight")],
                                      net.params[mfe_param_name(channel, layer, "bias")],
                                      net.mfe_spec(channel, layer))
        x, relu_cache = layers.relu(z)
        caches.append((conv_cache, relu_cache))
    return x, caches


def forward_with_trace(net: Network, image: Tensor) -> Tuple[Tensor, ForwardTrace]:
    """Forward completo guardando las cachés para backward()."""
    Y, measure_cache = _measure(net, image)
    X1, deconv_cache = _initial_reconstruct(net, Y)
    trace = ForwardTrace(measure=measure_cache, deconv=deconv_cache)

    features = []
    for channel in range(1, net.config.mfe_channels + 1):
        F, caches = _mfe_channel(net, channel, X1)
        features.append(F)
        trace.mfe.append(caches)

    fused, trace.concat = layers.concat_channels(features)
    z, trace.fusion = layers.conv2d(fused, net.params["fusion.weight"], net.params["fusion.bias"], net.fusion_spec())
    s, trace.fusion_relu = layers.relu(z)
    out, trace.head = layers.conv2d(s, net.params["head.weight"], net.params["head.bias"], net.head_spec())
    return out, trace


def measure(net: Network, image: Tensor) -> Tensor:
    """Y = w₁ ⊛ X: kernel B×B, stride B, sin relleno, sin bias, sin activación."""
    return _measure(net, image)[0]


def initial_reconstruct(net: Network, Y: Tensor) -> Tensor:
    """X₁ = w₂ ⊛ᵀ Y + b (convolución transpuesta B×B, stride B)."""
    return _initial_reconstruct(net, Y)[0]


def mfe_forward(net: Network, x1: Tensor) -> List[Tensor]:
    """Mapas F₁..F_C, cada uno con filters_per_layer canales y el tamaño de X₁."""
    if x1.dims[1] != 1:
        raise DimensionError("channels", 1, x1.dims[1], "mfe_forward")
    x1 = _cast(net, x1)
    return [_mfe_channel(net, c, x1)[0] for c in range(1, net.config.mfe_channels + 1)]


def forward(net: Network, image: Tensor) -> Tensor:
    """X* = w_l ⊛ ReLU(w_s ⊛ concat(F₁..F_C)), con las mismas dimensiones que la entrada."""
    return forward_with_trace(net, image)[0]


# ============================================================
# BACKWARD
# ============================================================

def backward(net: Network, trace: ForwardTrace, grad_out: Tensor) -> Dict[str, np.ndarray]:
    """Gradientes de todos los parámetros, incluidos los de medida (entrenamiento conjunto)."""
    grads: Dict[str, np.ndarray] = {}

    g, grads["head.weight"], grads["head.bias"] = layers.conv2d_backward(grad_out, trace.head)
    g = layers.relu_backward(g, trace.fusion_relu)
    g, grads["fusion.weight"], grads["fusion.bias"] = layers.conv2d_backward(g, trace.fusion)
    per_channel = layers.split_channels_backward(g, trace.concat)

    grad_x1: Optional[np.ndarray] = None
    for channel, (g_c, caches) in enumerate(zip(per_channel, trace.mfe), 1):
        for layer in range(len(caches), 0, -1):
            conv_cache, relu_cache = caches[layer - 1]
            g_c = layers.relu_backward(g_c, relu_cache)
            g_c, gw, gb = layers.conv2d_backward(g_c, conv_cache)
            grads[mfe_param_name(channel, layer, "weight")] = gw
            grads[mfe_param_name(channel, layer, "bias")] = gb
        grad_x1 = g_c.data if grad_x1 is None else grad_x1 + g_c.data

    g_y, grads["deconv.weight"], grads["deconv.bias"] = layers.conv_transpose2d_backward(Tensor(grad_x1), trace.deconv)
    _, grads["measurement.weight"], _ = layers.conv2d_backward(g_y, trace.measure)

    return {name: grads[name] for name in net.params}


def loss_and_grads(net: Network, images: Tensor) -> Tuple[float, Dict[str, np.ndarray]]:
    """Objetivo de entrenamiento: MSE entre X* y la propia entrada."""
    images = _cast(net, images)
    out, trace = forward_with_trace(net, images)
    loss, grad_out = layers.mse_loss(out, images)
    return loss, backward(net, trace, grad_out)
