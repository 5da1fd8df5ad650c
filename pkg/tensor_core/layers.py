"""
tensor_core/layers.py
Operaciones diferenciables sobre tensores (n, c, h, w): convolución con
stride/dilatación/relleno, convolución transpuesta, ReLU, concatenación por
canales y pérdida MSE. Cada forward devuelve (salida, caché) y su backward
consume esa caché.

Las convoluciones apilan las ventanas de los taps no nulos del kernel (orden
row-major) y las contraen en una sola llamada a BLAS por bloque de filas. Un
tap con pesos todos cero no aporta nada y se omite, así que la convolución
dilatada y la convolución con el kernel inflado de ceros hacen exactamente las
mismas llamadas con los mismos datos (resultados idénticos bit a bit).
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from tensor_core.errors import DimensionError, GeometryError
from tensor_core.tensor import ConvSpec, LayerCache, OpKind, Tensor, check_same_dims

logger = logging.getLogger(__name__)

Grads = Tuple[Tensor, np.ndarray, Optional[np.ndarray]]
Taps = List[Tuple[int, int]]

# Tope de elementos de la pila de ventanas por bloque de filas de salida
MAX_WINDOW_ELEMENTS = 1 << 24


# ============================================================
# UTILIDADES INTERNAS
# ============================================================

def _as_array(weights) -> np.ndarray:
    return weights.data if isinstance(weights, Tensor) else np.asarray(weights)


def _check_bias(bias: Optional[np.ndarray], channels: int, context: str) -> Optional[np.ndarray]:
    if bias is None:
        return None
    bias = np.asarray(bias)
    if bias.shape != (channels,):
        raise DimensionError("bias", (channels,), bias.shape, context)
    return bias


def _tap(offset: int, stride: int, count: int) -> slice:
    """Posiciones offset, offset+stride, ... (count elementos)."""
    return slice(offset, offset + stride * (count - 1) + 1, stride)


def _all_taps(kh: int, kw: int) -> Taps:
    return [(i, j) for i in range(kh) for j in range(kw)]


def _active_taps(W: np.ndarray) -> Taps:
    """Taps (i, j) con algún peso distinto de cero, en orden row-major."""
    return [(i, j) for i, j in _all_taps(W.shape[2], W.shape[3]) if W[:, :, i, j].any()]


def _tap_weights(W: np.ndarray, taps: Taps) -> np.ndarray:
    """Pesos (A, B, T) de los taps indicados."""
    rows, cols = zip(*taps)
    return W[:, :, list(rows), list(cols)]


def _row_blocks(rows: int, per_row: int) -> List[Tuple[int, int]]:
    step = max(1, MAX_WINDOW_ELEMENTS // max(1, per_row))
    return [(r, min(rows, r + step)) for r in range(0, rows, step)]


def _windows(x: np.ndarray, taps: Taps, dilation: int, stride: int, r0: int, r1: int, wo: int) -> np.ndarray:
    """Ventanas (n, c, T, r1−r0, wo) que cada tap lee para las filas de salida [r0, r1)."""
    return np.stack([x[:, :, _tap(i * dilation + stride * r0, stride, r1 - r0), _tap(j * dilation, stride, wo)]
                     for i, j in taps], axis=2)


# ============================================================
# CONVOLUCIÓN 2D
# ============================================================

def conv2d(input: Tensor, weights, bias: Optional[np.ndarray], spec: ConvSpec) -> Tuple[Tensor, LayerCache]:
    """
    Correlación cruzada 2D con stride, dilatación y relleno de ceros.

    Args:
        input: tensor (n, I, h, w)
        weights: (O, I, Kh, Kw)
        bias: vector (O,) o None
        spec: geometría de la capa (debe cuadrar con los pesos)

    Returns:
        (salida (n, O, ho, wo), caché para conv2d_backward)
    """
    W = _as_array(weights)
    if W.ndim != 4:
        raise DimensionError("rank", 4, W.ndim, "conv2d weights")
    for axis, expected, got in zip(("out_channels", "in_channels", "kernel_h", "kernel_w"),
                                   spec.weight_dims, W.shape):
        if expected != got:
            raise DimensionError(axis, expected, got, "conv2d weights vs spec")
    n, c, h, w = input.dims
    if c != spec.in_channels:
        raise DimensionError("channels", spec.in_channels, c, "conv2d input")
    bias = _check_bias(bias, spec.out_channels, "conv2d")
    ho, wo = spec.output_hw(h, w)

    p, s, d = spec.padding, spec.stride, spec.dilation
    xp = np.pad(input.data, ((0, 0), (0, 0), (p, p), (p, p))) if p > 0 else input.data
    dtype = np.result_type(input.data, W)

    # Acumulamos en (O, n, ho, wo); la contracción es sobre (I, tap)
    out_t = np.zeros((spec.out_channels, n, ho, wo), dtype=dtype)
    taps = _active_taps(W)
    if taps:
        W_t = _tap_weights(W, taps)
        for r0, r1 in _row_blocks(ho, n * c * len(taps) * wo):
            out_t[:, :, r0:r1] = np.tensordot(W_t, _windows(xp, taps, d, s, r0, r1, wo), axes=([1, 2], [1, 2]))

    out = np.ascontiguousarray(out_t.transpose(1, 0, 2, 3))
    if bias is not None:
        out += bias.reshape(1, -1, 1, 1)

    cache = LayerCache(op=OpKind.CONV2D, input=input, output_dims=out.shape, spec=spec,
                       weights=W, has_bias=bias is not None, extra={"padded": xp})
    return Tensor(out), cache


def conv2d_backward(grad_out: Tensor, cache: LayerCache) -> Grads:
    """Gradientes exactos de conv2d respecto a entrada, pesos y bias."""
    cache.claim(OpKind.CONV2D, grad_out.dims)
    spec, W, xp = cache.spec, cache.weights, cache.extra["padded"]
    n, c, h, w = cache.input.dims
    _, _, ho, wo = cache.output_dims
    p, s, d = spec.padding, spec.stride, spec.dilation
    g = grad_out.data

    every_tap = _all_taps(spec.kernel_h, spec.kernel_w)
    active = _active_taps(W)
    W_t = _tap_weights(W, active) if active else None

    grad_w = np.zeros((spec.out_channels, c, len(every_tap)), dtype=np.result_type(g, xp))
    # grad de la entrada rellenada, en orden (I, n, H, W)
    gxp_t = np.zeros((c, n, xp.shape[2], xp.shape[3]), dtype=np.result_type(g, W))
    for r0, r1 in _row_blocks(ho, n * c * len(every_tap) * wo):
        g_rows = g[:, :, r0:r1]
        grad_w += np.tensordot(g_rows, _windows(xp, every_tap, d, s, r0, r1, wo), axes=([0, 2, 3], [0, 3, 4]))
        if W_t is None:
            continue
        # (I, T, n, filas, wo): lo que cada tap devuelve a su ventana
        back = np.tensordot(W_t, g_rows, axes=([0], [1]))
        for t, (i, j) in enumerate(active):
            gxp_t[:, :, _tap(i * d + s * r0, s, r1 - r0), _tap(j * d, s, wo)] += back[:, t]

    grad_in = gxp_t.transpose(1, 0, 2, 3)[:, :, p:p + h, p:p + w]
    grad_b = g.sum(axis=(0, 2, 3)) if cache.has_bias else None
    return Tensor(np.ascontiguousarray(grad_in)), grad_w.reshape(W.shape), grad_b


# ============================================================
# CONVOLUCIÓN TRANSPUESTA
# ============================================================

def conv_transpose2d(input: Tensor, weights, bias: Optional[np.ndarray], stride: int) -> Tuple[Tensor, LayerCache]:
    """
    Convolución transpuesta (adjunta de conv2d con el mismo stride, sin relleno).

    Cada entrada estampa su kernel (I, O, Kh, Kw) en la salida con paso `stride`:
    ho = (h − 1)·stride + Kh.
    """
    W = _as_array(weights)
    if W.ndim != 4:
        raise DimensionError("rank", 4, W.ndim, "conv_transpose2d weights")
    n, c, h, w = input.dims
    if c != W.shape[0]:
        raise DimensionError("channels", W.shape[0], c, "conv_transpose2d input")
    if stride < 1:
        raise GeometryError(f"conv_transpose2d stride must be >= 1, got {stride}")
    in_ch, out_ch, kh, kw = W.shape
    bias = _check_bias(bias, out_ch, "conv_transpose2d")
    ho, wo = (h - 1) * stride + kh, (w - 1) * stride + kw

    # (O, Kh, Kw, n, h, w): una sola contracción sobre I y luego el estampado por tap
    stamps = np.tensordot(W, input.data, axes=([0], [1]))
    out_t = np.zeros((out_ch, n, ho, wo), dtype=np.result_type(input.data, W))
    for i, j in _all_taps(kh, kw):
        out_t[:, :, _tap(i, stride, h), _tap(j, stride, w)] += stamps[:, i, j]

    out = np.ascontiguousarray(out_t.transpose(1, 0, 2, 3))
    if bias is not None:
        out += bias.reshape(1, -1, 1, 1)

    spec = ConvSpec(out_ch, in_ch, kh, kw, stride=stride, has_bias=bias is not None)
    cache = LayerCache(op=OpKind.CONV_TRANSPOSE2D, input=input, output_dims=out.shape, spec=spec,
                       weights=W, has_bias=bias is not None)
    return Tensor(out), cache


def conv_transpose2d_backward(grad_out: Tensor, cache: LayerCache) -> Grads:
    """
    Backward de la convolución transpuesta. El gradiente de la entrada es
    literalmente conv2d(grad_out, W) con el mismo stride.
    """
    cache.claim(OpKind.CONV_TRANSPOSE2D, grad_out.dims)
    W, s = cache.weights, cache.spec.stride
    in_ch, out_ch, kh, kw = W.shape
    x = cache.input.data
    _, _, h, w = cache.input.dims
    g = grad_out.data

    adjoint_spec = ConvSpec(in_ch, out_ch, kh, kw, stride=s, has_bias=False)
    grad_in, _ = conv2d(grad_out, W, None, adjoint_spec)

    windows = _windows(g, _all_taps(kh, kw), 1, s, 0, h, w)
    grad_w = np.tensordot(x, windows, axes=([0, 2, 3], [0, 3, 4])).reshape(W.shape)

    grad_b = g.sum(axis=(0, 2, 3)) if cache.has_bias else None
    return grad_in, grad_w, grad_b


# ============================================================
# ACTIVACIÓN, CONCATENACIÓN Y PÉRDIDA
# ============================================================

def relu(input: Tensor) -> Tuple[Tensor, LayerCache]:
    out = np.maximum(input.data, 0.0).astype(input.dtype, copy=False)
    return Tensor(out), LayerCache(op=OpKind.RELU, input=input, output_dims=out.shape)


def relu_backward(grad_out: Tensor, cache: LayerCache) -> Tensor:
    """Subgradiente 0 en x = 0 exactamente."""
    cache.claim(OpKind.RELU, grad_out.dims)
    return Tensor(np.where(cache.input.data > 0, grad_out.data, 0.0).astype(grad_out.dtype, copy=False))


def concat_channels(inputs: Sequence[Tensor]) -> Tuple[Tensor, LayerCache]:
    """Concatena por el eje de canales respetando el orden de entrada."""
    if not inputs:
        raise DimensionError("inputs", ">= 1 tensor", 0, "concat_channels")
    first = inputs[0].dims
    for t in inputs[1:]:
        for axis, expected, got in zip(("batch", "height", "width"),
                                       (first[0], first[2], first[3]),
                                       (t.dims[0], t.dims[2], t.dims[3])):
            if expected != got:
                raise DimensionError(axis, expected, got, "concat_channels")
    out = np.concatenate([t.data for t in inputs], axis=1)
    bounds = np.cumsum([t.dims[1] for t in inputs])[:-1].tolist()
    cache = LayerCache(op=OpKind.CONCAT, input=inputs[0], output_dims=out.shape,
                       extra={"boundaries": bounds})
    return Tensor(out), cache


def split_channels_backward(grad_out: Tensor, cache: LayerCache) -> List[Tensor]:
    """Parte el gradiente por las mismas fronteras de canal que la concatenación."""
    cache.claim(OpKind.CONCAT, grad_out.dims)
    return [Tensor(np.ascontiguousarray(part)) for part in np.split(grad_out.data, cache.extra["boundaries"], axis=1)]


def mse_loss(pred: Tensor, target: Tensor) -> Tuple[float, Tensor]:
    """
    Pérdida (1/2I)·Σ‖pred_i − target_i‖² sobre los I elementos del lote.
    El gradiente es (pred − target)/I.
    """
    check_same_dims(pred.dims, target.dims, "mse_loss")
    batch = pred.dims[0]
    diff = pred.data - target.data
    loss = float(np.sum(diff * diff)) / (2.0 * batch)
    return loss, Tensor(diff / batch)


# ============================================================
# DILATACIÓN DE KERNELS
# ============================================================

def dilate_kernel(weights, d: int) -> Tensor:
    """
    Infla un kernel (O, I, K, K) insertando d−1 ceros entre taps.
    El resultado mide d·(K−1)+1 y conserva los K² valores no nulos en (d·i, d·j).
    """
    if d < 1:
        raise GeometryError(f"dilation factor must be >= 1, got {d}")
    W = _as_array(weights)
    o, i, kh, kw = W.shape
    out = np.zeros((o, i, d * (kh - 1) + 1, d * (kw - 1) + 1), dtype=W.dtype)
    out[:, :, ::d, ::d] = W
    return Tensor(out)
