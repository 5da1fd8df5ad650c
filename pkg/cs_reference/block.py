"""
cs_reference/block.py
Medida CS por bloques y su equivalencia con la capa convolucional de medida.

Recorrido fijo: bloques en orden row-major y cada bloque aplanado row-major.
"""

import numpy as np

from cs_reference.models import CSMatrix
from tensor_core.errors import DimensionError, GeometryError


def block_measure(image: np.ndarray, phi_b: CSMatrix, B: int) -> np.ndarray:
    """
    Y_i = Φ_B · vec(X_i) para cada bloque B×B.

    Devuelve una matriz (nº de bloques, M): fila i = bloque i en orden row-major.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise DimensionError("rank", 2, image.ndim, "block_measure")
    h, w = image.shape
    if h % B or w % B:
        raise GeometryError(f"image {h}x{w} is not a multiple of block size {B}")
    if phi_b.N != B * B:
        raise DimensionError("cols", B * B, phi_b.N, "block_measure")
    blocks = image.reshape(h // B, B, w // B, B).transpose(0, 2, 1, 3).reshape(-1, B * B)
    return blocks @ phi_b.phi.T


def kernels_to_matrix(weights: np.ndarray) -> CSMatrix:
    """w₁ (n,1,B,B) -> Φ_B (n, B²): fila k = kernel k aplanado."""
    weights = np.asarray(weights)
    if weights.ndim != 4 or weights.shape[1] != 1 or weights.shape[2] != weights.shape[3]:
        raise DimensionError("weights", "(n, 1, B, B)", weights.shape, "kernels_to_matrix")
    n, _, B, _ = weights.shape
    return CSMatrix(weights.reshape(n, B * B), block_size=B)


def measurements_to_blocks(Y: np.ndarray) -> np.ndarray:
    """Salida de measure() (1, n, h/B, w/B) -> (nº de bloques, n) en el orden de block_measure."""
    Y = np.asarray(Y)
    if Y.ndim != 4 or Y.shape[0] != 1:
        raise DimensionError("batch", 1, Y.shape[0] if Y.ndim == 4 else Y.ndim, "measurements_to_blocks")
    n = Y.shape[1]
    return Y[0].reshape(n, -1).T


def gaussian_block_matrix(M: int, B: int, seed: int) -> CSMatrix:
    """Φ_B gaussiana aleatoria M×B² con columnas de norma unidad."""
    if not 1 <= M <= B * B:
        raise ValueError(f"M must lie in 1..{B * B}, got {M}")
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal((M, B * B))
    phi /= np.linalg.norm(phi, axis=0, keepdims=True)
    return CSMatrix(phi, block_size=B)
