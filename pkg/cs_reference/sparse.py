"""
cs_reference/sparse.py
Modelo disperso x = Ψs, base DCT y el objetivo ℓ1 del problema de recuperación
(solo como función objetivo: aquí no hay resolutor).
"""

import numpy as np
from scipy.fft import dct

from cs_reference.models import CSMatrix, SparseModel
from tensor_core.errors import DimensionError


def sparse_synthesis(model: SparseModel) -> np.ndarray:
    model.validate()
    return model.psi @ model.s


def dct_basis(N: int) -> np.ndarray:
    """Ψ ortonormal cuyas columnas son los átomos DCT-II (x = Ψs ⇔ s = DCT(x))."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    # dct(I) por columnas da la matriz de análisis D; la base de síntesis es Dᵀ
    return dct(np.eye(N), norm="ortho", axis=0).T


def l1_objective(s: np.ndarray) -> float:
    return float(np.sum(np.abs(s)))


def measurement_residual(phi: CSMatrix, psi: np.ndarray, s: np.ndarray, y: np.ndarray) -> float:
    """‖y − ΦΨs‖₂: la restricción del programa ℓ1."""
    s = np.asarray(s, dtype=np.float64).reshape(-1)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.shape[0] != phi.M:
        raise DimensionError("rows", phi.M, y.shape[0], "measurement_residual")
    return float(np.linalg.norm(y - phi.phi @ (psi @ s)))
