"""
training/optimizer.py
Paso de Adam con corrección de sesgo (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
"""

from typing import Dict, Tuple

import numpy as np

from tensor_core.errors import DimensionError, NonFiniteGradientError
from training.models import AdamState


def adam_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray], state: AdamState,
              lr: float) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """
    Actualiza `params` in situ.

    Todos los gradientes se validan antes de tocar nada: si alguno no es
    finito el paso se aborta entero y ni los parámetros ni el estado cambian.
    """
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    for name, p in params.items():
        if name not in grads:
            raise DimensionError("parameter", name, "missing gradient", "adam_step")
        if grads[name].shape != p.shape:
            raise DimensionError(name, p.shape, grads[name].shape, "adam_step")
        if not np.isfinite(grads[name]).all():
            raise NonFiniteGradientError(name)

    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for name, p in params.items():
        g = grads[name].astype(p.dtype, copy=False)
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state
