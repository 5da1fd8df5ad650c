"""
cli/verify.py
Suites de verificación (oráculos) que ejecuta el subcomando `verify`.

Cada suite devuelve (ok, detalle). Las capas se llaman a través del módulo
`layers` para que un backward sustituido en caliente se detecte.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from cs_reference.block import block_measure, kernels_to_matrix, measurements_to_blocks
from cs_reference.models import CSMatrix
from cs_reference.rip import rip_constant
from msdcnn.models import NetworkConfig
from msdcnn.network import Network, build_network, forward_with_trace, loss_and_grads, measure, min_relu_margin
from tensor_core import layers
from tensor_core.gradcheck import gradcheck
from tensor_core.tensor import ConvSpec, Tensor

logger = logging.getLogger(__name__)

GRAD_TOL = 1e-4
EQUIVALENCE_TOL = 1e-12
ADJOINT_TOL = 1e-10
RIP_TOL = 1e-10
MIN_MARGIN = 1e-4

MICRO_CONFIG = NetworkConfig(measurement_rate=0.25, block_size=4, mfe_channels=2, layers_per_channel=2,
                             filters_per_layer=4, fusion_filters=4)
MICRO_SIZE = 8


@dataclass
class SuiteResult:
    name: str
    ok: bool
    detail: str


# ============================================================
# GRADIENTES
# ============================================================

def _conv_op(spec: ConvSpec, target: np.ndarray):
    def op(p: Dict[str, np.ndarray]):
        out, cache = layers.conv2d(Tensor(p["x"]), p["w"], p["b"], spec)
        loss, g = layers.mse_loss(out, Tensor(target))
        gx, gw, gb = layers.conv2d_backward(g, cache)
        return loss, {"x": gx.data, "w": gw, "b": gb}
    return op


def _conv_transpose_op(stride: int, target: np.ndarray):
    def op(p: Dict[str, np.ndarray]):
        out, cache = layers.conv_transpose2d(Tensor(p["x"]), p["w"], p["b"], stride)
        loss, g = layers.mse_loss(out, Tensor(target))
        gx, gw, gb = layers.conv_transpose2d_backward(g, cache)
        return loss, {"x": gx.data, "w": gw, "b": gb}
    return op


def _relu_concat_op(target: np.ndarray):
    def op(p: Dict[str, np.ndarray]):
        a, ca = layers.relu(Tensor(p["a"]))
        joined, cc = layers.concat_channels([a, Tensor(p["b"])])
        loss, g = layers.mse_loss(joined, Tensor(target))
        ga, gb = layers.split_channels_backward(g, cc)
        return loss, {"a": layers.relu_backward(ga, ca).data, "b": gb.data}
    return op


def layer_gradcheck(seed: int) -> float:
    """Peor error relativo de las operaciones de capa para una semilla."""
    rng = np.random.default_rng(seed)
    worst = 0.0

    for stride, dilation, padding in ((1, 1, 1), (2, 1, 0), (1, 2, 2)):
        spec = ConvSpec(3, 2, 3, 3, stride=stride, dilation=dilation, padding=padding)
        x = rng.standard_normal((2, 2, 7, 7))
        ho, wo = spec.output_hw(7, 7)
        point = {"x": x, "w": rng.standard_normal(spec.weight_dims), "b": rng.standard_normal(3)}
        target = rng.standard_normal((2, 3, ho, wo))
        worst = max(worst, gradcheck(_conv_op(spec, target), point))

    point = {"x": rng.standard_normal((2, 3, 3, 3)), "w": rng.standard_normal((3, 2, 2, 2)),
             "b": rng.standard_normal(2)}
    target = rng.standard_normal((2, 2, 6, 6))
    worst = max(worst, gradcheck(_conv_transpose_op(2, target), point))

    # lejos del pliegue de la ReLU
    a = rng.standard_normal((2, 2, 4, 4))
    a = np.sign(a) * (0.1 + np.abs(a))
    point = {"a": a, "b": rng.standard_normal((2, 1, 4, 4))}
    target = rng.standard_normal((2, 3, 4, 4))
    worst = max(worst, gradcheck(_relu_concat_op(target), point))
    return worst


def micro_network_point(seed: int, attempts: int = 50) -> Tuple[Network, Tensor]:
    """Red micro + imagen con todas las ReLU a más de MIN_MARGIN de su pliegue."""
    for k in range(attempts):
        rng = np.random.default_rng([seed, k])
        net = build_network(MICRO_CONFIG, seed * 1000 + k)
        image = Tensor(rng.random((2, 1, MICRO_SIZE, MICRO_SIZE)))
        _, trace = forward_with_trace(net, image)
        if min_relu_margin(trace) > MIN_MARGIN:
            return net, image
    raise RuntimeError(f"no kink-free micro network found for seed {seed}")


def network_gradcheck(seed: int, max_entries: int = 6) -> float:
    net, image = micro_network_point(seed)

    def op(params: Dict[str, np.ndarray]):
        return loss_and_grads(Network(net.config, params), image)

    return gradcheck(op, net.params, max_entries=max_entries, seed=seed)


def suite_gradients(seeds: Sequence[int]) -> SuiteResult:
    worst_layer = max(layer_gradcheck(s) for s in seeds)
    worst_net = max(network_gradcheck(s) for s in seeds)
    ok = worst_layer < GRAD_TOL and worst_net < GRAD_TOL
    return SuiteResult("gradients", ok, f"layers {worst_layer:.2e}, micro-network {worst_net:.2e} "
                                        f"(tol {GRAD_TOL:g}, {len(seeds)} seed(s))")


# ============================================================
# EQUIVALENCIAS EXACTAS
# ============================================================

def suite_measurement_equivalence(instances: int = 50) -> SuiteResult:
    worst = 0.0
    for k in range(instances):
        B = (2, 4, 32)[k % 3]
        rng = np.random.default_rng(k)
        config = NetworkConfig(measurement_rate=0.25, block_size=B, mfe_channels=1, layers_per_channel=1,
                               filters_per_layer=1, fusion_filters=1)
        net = build_network(config, k)
        blocks_h, blocks_w = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        image = rng.random((blocks_h * B, blocks_w * B))
        conv_y = measurements_to_blocks(measure(net, Tensor.from_image(image)).data)
        block_y = block_measure(image, kernels_to_matrix(net.params["measurement.weight"]), B)
        worst = max(worst, float(np.max(np.abs(conv_y - block_y))))
    return SuiteResult("measurement-equivalence", worst < EQUIVALENCE_TOL,
                       f"max |conv - block| = {worst:.2e} over {instances} instance(s)")


def suite_adjoint(instances: int = 50) -> SuiteResult:
    worst = 0.0
    for k in range(instances):
        rng = np.random.default_rng(k)
        O, I, K = (int(v) for v in rng.integers(1, 4, size=3))
        stride = int(rng.integers(1, 4))
        ho, wo = (int(v) for v in rng.integers(1, 5, size=2))
        h, w = (ho - 1) * stride + K, (wo - 1) * stride + K
        W = rng.standard_normal((O, I, K, K))
        x = Tensor(rng.standard_normal((2, I, h, w)))
        y = Tensor(rng.standard_normal((2, O, ho, wo)))
        forward_out, _ = layers.conv2d(x, W, None, ConvSpec(O, I, K, K, stride=stride, has_bias=False))
        adjoint_out, _ = layers.conv_transpose2d(y, W, None, stride)
        lhs = float(np.vdot(forward_out.data, y.data))
        rhs = float(np.vdot(x.data, adjoint_out.data))
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(lhs)))
    return SuiteResult("adjoint", worst < ADJOINT_TOL, f"max |<Ax,y> - <x,Aᵀy>| = {worst:.2e}")


def suite_dilation(instances: int = 30) -> SuiteResult:
    mismatches = 0
    for k in range(instances):
        rng = np.random.default_rng(k)
        d = k % 3 + 1
        O, I = (int(v) for v in rng.integers(1, 4, size=2))
        size = int(rng.integers(2 * d + 1, 12))
        W = rng.standard_normal((O, I, 3, 3))
        x = Tensor(rng.standard_normal((1, I, size, size)))
        dilated, _ = layers.conv2d(x, W, None, ConvSpec(O, I, 3, 3, dilation=d, padding=d, has_bias=False))
        inflated = layers.dilate_kernel(W, d).data
        K = inflated.shape[2]
        plain, _ = layers.conv2d(x, inflated, None, ConvSpec(O, I, K, K, padding=d, has_bias=False))
        if not np.array_equal(dilated.data, plain.data):
            mismatches += 1
    return SuiteResult("dilation", mismatches == 0, f"{mismatches} bitwise mismatch(es) in {instances} case(s)")


# ============================================================
# RIP
# ============================================================

def _rip_by_gram(phi: np.ndarray, K: int) -> float:
    """Enumeración independiente vía autovalores de la matriz de Gram."""
    delta = 0.0
    for support in itertools.combinations(range(phi.shape[1]), K):
        sub = phi[:, support]
        eig = np.linalg.eigvalsh(sub.T @ sub)
        delta = max(delta, 1.0 - eig[0], eig[-1] - 1.0)
    return delta


def suite_rip() -> SuiteResult:
    q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((6, 6)))
    orthonormal = max(rip_constant(CSMatrix(q), K) for K in (1, 2, 3))
    zero_column = rip_constant(CSMatrix([[1.0, 0.0], [0.0, 0.0]]), 1)
    gaussian = np.random.default_rng(1).standard_normal((4, 8)) / 2.0
    brute = rip_constant(CSMatrix(gaussian), 2)
    reference = _rip_by_gram(gaussian, 2)
    ok = orthonormal < RIP_TOL and math.isclose(zero_column, 1.0, abs_tol=RIP_TOL) \
        and abs(brute - reference) < RIP_TOL
    return SuiteResult("rip", ok, f"orthonormal δ={orthonormal:.1e}, zero column δ₁={zero_column:.3f}, "
                                  f"4x8 δ₂={brute:.6f} vs {reference:.6f}")


# ============================================================
# EJECUCIÓN
# ============================================================

def default_suites(seeds: Sequence[int]) -> List[Tuple[str, Callable[[], SuiteResult]]]:
    return [
        ("gradients", lambda: suite_gradients(seeds)),
        ("measurement-equivalence", suite_measurement_equivalence),
        ("adjoint", suite_adjoint),
        ("dilation", suite_dilation),
        ("rip", suite_rip),
    ]


def run_suites(seeds: Sequence[int] = (0, 1, 2), out=print) -> bool:
    """Ejecuta todas las suites, imprime PASS/FAIL por suite y devuelve si pasaron todas."""
    all_ok = True
    for name, suite in default_suites(seeds):
        try:
            result = suite()
        except Exception as e:
            logger.debug(f"suite {name} raised", exc_info=True)
            result = SuiteResult(name, False, f"{type(e).__name__}: {e}")
        out(f"{'PASS' if result.ok else 'FAIL'}\t{result.name}\t{result.detail}")
        all_ok = all_ok and result.ok
    return all_ok
