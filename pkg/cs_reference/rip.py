"""
cs_reference/rip.py
Constante RIP por enumeración exhaustiva de soportes (solo para matrices pequeñas).
"""

import itertools
import logging
import math

from scipy.linalg import svdvals

from cs_reference.models import CSMatrix
from tensor_core.errors import RipBudgetError

logger = logging.getLogger(__name__)

SUPPORT_BUDGET = 1_000_000


def rip_constant(phi: CSMatrix, K: int) -> float:
    """
    δ_K = max sobre |S| = K de max(1 − σ_min²(Φ_S), σ_max²(Φ_S) − 1).

    Si K > M las submatrices tienen σ_min = 0 en su rango completo, así que
    δ_K >= 1.
    """
    N = phi.N
    if not 1 <= K <= N:
        raise ValueError(f"K must lie in 1..{N}, got {K}")
    supports = math.comb(N, K)
    if supports > SUPPORT_BUDGET:
        raise RipBudgetError(
            f"C({N},{K}) = {supports:,} supports exceeds the brute-force budget of {SUPPORT_BUDGET:,}; "
            f"use a smaller N or K")

    delta = 0.0
    for support in itertools.combinations(range(N), K):
        sigma = svdvals(phi.phi[:, support])
        sigma_max = float(sigma[0])
        # con K > M hay K − M valores singulares nulos que svdvals no devuelve
        sigma_min = float(sigma[-1]) if len(sigma) == K else 0.0
        delta = max(delta, 1.0 - sigma_min ** 2, sigma_max ** 2 - 1.0)
    logger.debug(f"δ_{K} = {delta:.6f} over {supports} supports")
    return delta
