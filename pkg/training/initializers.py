"""
training/initializers.py
Inicialización He (normal, varianza 2/fan_in) determinista por semilla.
"""

from typing import Sequence, Tuple, Union

import numpy as np

Seed = Union[int, Sequence[int]]


def he_init(shape: Tuple[int, ...], fan_in: int, seed: Seed, is_bias: bool = False,
            dtype=np.float64) -> np.ndarray:
    """
    Args:
        shape: forma del parámetro
        fan_in: número de entradas que ve cada salida (>= 1)
        seed: entero o secuencia de enteros (se pasa a default_rng)
        is_bias: los bias se inicializan exactamente a cero

    Returns:
        Array con entradas i.i.d. N(0, 2/fan_in)
    """
    if is_bias:
        return np.zeros(shape, dtype=dtype)
    if fan_in < 1:
        raise ValueError(f"fan_in must be >= 1, got {fan_in}")
    rng = np.random.default_rng(seed)
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)
