"""
tensor_core/gradcheck.py
Comprobación de gradientes por diferencias finitas centrales.
"""

import logging
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from tensor_core.errors import GradientCheckError

logger = logging.getLogger(__name__)

# fn(params) -> (pérdida escalar, gradientes analíticos con las mismas claves)
ScalarOp = Callable[[Dict[str, np.ndarray]], Tuple[float, Dict[str, np.ndarray]]]

EPS_RANGE = (1e-6, 1e-4)


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)


def gradcheck(op: ScalarOp, point: Dict[str, np.ndarray], eps: float = 1e-5,
              max_entries: Optional[int] = None, seed: int = 0) -> float:
    """
    Compara los gradientes analíticos de `op` con diferencias centrales.

    Args:
        op: composición escalar (terminada en mse_loss) que devuelve (loss, grads)
        point: parámetros en doble precisión; se perturban in situ y se restauran
        eps: paso de la diferencia, dentro de [1e-6, 1e-4]
        max_entries: si se indica, solo se comprueban tantas entradas por
            parámetro, elegidas al azar con `seed`

    Returns:
        max |analítico − numérico| / max(|analítico|, |numérico|, 1e-8)
    """
    if not EPS_RANGE[0] <= eps <= EPS_RANGE[1]:
        raise ValueError(f"eps must lie in {EPS_RANGE}, got {eps}")

    loss, analytic = op(point)
    if not np.isfinite(loss):
        raise GradientCheckError("<loss>", -1, "non-finite loss at the check point")

    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, value in point.items():
        if value.dtype != np.float64:
            logger.warning(f"⚠️ gradcheck on '{name}' with dtype {value.dtype}; tolerances assume float64")
        grad = analytic.get(name)
        if grad is None:
            raise GradientCheckError(name, -1, "op returned no analytic gradient")
        grad_flat = np.asarray(grad).reshape(-1)
        if not np.isfinite(grad_flat).all():
            bad = int(np.flatnonzero(~np.isfinite(grad_flat))[0])
            raise GradientCheckError(name, bad, "non-finite analytic gradient")

        if not value.flags.c_contiguous:
            raise ValueError(f"gradcheck needs C-contiguous arrays, '{name}' is not")
        flat = value.reshape(-1)  # vista: perturbamos el array original
        indices = np.arange(flat.size)
        if max_entries is not None and flat.size > max_entries:
            indices = np.sort(rng.choice(flat.size, size=max_entries, replace=False))

        for idx in indices:
            original = flat[idx]
            flat[idx] = original + eps
            plus, _ = op(point)
            flat[idx] = original - eps
            minus, _ = op(point)
            flat[idx] = original
            if not (np.isfinite(plus) and np.isfinite(minus)):
                raise GradientCheckError(name, int(idx), "non-finite loss under perturbation")
            numeric = (plus - minus) / (2.0 * eps)
            worst = max(worst, relative_error(float(grad_flat[idx]), numeric))

    logger.debug(f"gradcheck max relative error {worst:.3e}")
    return worst
