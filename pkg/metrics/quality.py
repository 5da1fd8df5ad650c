"""
metrics/quality.py
PSNR y SSIM en la escala 0–255.
"""

import math

import numpy as np
from skimage.metrics import structural_similarity

from tensor_core.errors import DimensionError, GeometryError

PEAK = 255.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def _pair(a, b, context: str):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionError("shape", a.shape, b.shape, context)
    return a, b


def psnr(a, b, peak: float = PEAK) -> float:
    """10·log₁₀(peak²/MSE). Imágenes idénticas -> +inf."""
    a, b = _pair(a, b, "psnr")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def ssim(a, b, data_range: float = PEAK) -> float:
    """SSIM de escala única: ventana gaussiana 11×11, σ = 1.5, K₁ = 0.01, K₂ = 0.03."""
    a, b = _pair(a, b, "ssim")
    if a.ndim != 2:
        raise DimensionError("rank", 2, a.ndim, "ssim")
    if min(a.shape) < SSIM_WINDOW:
        raise GeometryError(f"ssim needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {a.shape[0]}x{a.shape[1]}")
    return float(structural_similarity(a, b, data_range=data_range, gaussian_weights=True, sigma=SSIM_SIGMA,
                                       use_sample_covariance=False, K1=SSIM_K1, K2=SSIM_K2))
