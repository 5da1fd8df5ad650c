"""
cs_reference/models.py
Modelos del CS clásico: matriz de medida Φ y modelo disperso x = Ψs.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from tensor_core.errors import DimensionError, OrthonormalityError

ORTHONORMAL_TOL = 1e-10


@dataclass
class CSMatrix:
    """Φ densa M×N. En la variante por bloques N = B²."""
    phi: np.ndarray
    block_size: Optional[int] = None

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        if self.phi.ndim != 2:
            raise DimensionError("rank", 2, self.phi.ndim, "CSMatrix")
        if not np.isfinite(self.phi).all():
            raise ValueError("CSMatrix entries must be finite")
        if self.block_size is not None and self.N != self.block_size ** 2:
            raise DimensionError("cols", self.block_size ** 2, self.N, "CSMatrix (block variant)")

    @property
    def M(self) -> int:
        return self.phi.shape[0]

    @property
    def N(self) -> int:
        return self.phi.shape[1]

    @property
    def is_compressive(self) -> bool:
        return self.M <= self.N


@dataclass
class SparseModel:
    """Base ortonormal Ψ (N×N), coeficientes s y, si se ha estimado, δ_K."""
    psi: np.ndarray
    s: np.ndarray
    delta: Optional[float] = None

    def __post_init__(self):
        self.psi = np.asarray(self.psi, dtype=np.float64)
        self.s = np.asarray(self.s, dtype=np.float64).reshape(-1)
        if self.psi.ndim != 2 or self.psi.shape[0] != self.psi.shape[1]:
            raise DimensionError("psi", "square N×N", self.psi.shape, "SparseModel")
        if self.s.shape[0] != self.N:
            raise DimensionError("s", self.N, self.s.shape[0], "SparseModel")

    @property
    def N(self) -> int:
        return self.psi.shape[0]

    @property
    def K(self) -> int:
        return int(np.count_nonzero(self.s))

    def validate(self) -> None:
        err = float(np.max(np.abs(self.psi.T @ self.psi - np.eye(self.N))))
        if err > ORTHONORMAL_TOL:
            raise OrthonormalityError(f"Ψ is not orthonormal: max |ΨᵀΨ - I| = {err:.3e}")
