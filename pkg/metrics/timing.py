"""
metrics/timing.py
Medición del coste de reconstrucción (mediana en milisegundos).
"""

import statistics
import time

from msdcnn.network import Network, forward
from tensor_core.errors import ConfigError
from tensor_core.tensor import Tensor

MIN_REPEATS = 3


def time_reconstruction(net: Network, image: Tensor, repeats: int = 5) -> float:
    """Mediana del tiempo de forward() tras una llamada de calentamiento."""
    if repeats < MIN_REPEATS:
        raise ConfigError(f"repeats must be >= {MIN_REPEATS}, got {repeats}")
    forward(net, image)
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        forward(net, image)
        samples.append((time.perf_counter() - start) * 1000.0)
    return statistics.median(samples)
