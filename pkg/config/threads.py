"""
config/threads.py
Límites de hilos de BLAS.

Este módulo no importa numpy (ni nada que lo importe): start.py lo llama
antes de cargar el resto del toolkit, que es cuando BLAS lee estas variables.
"""

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

THREAD_VARIABLES = ("OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "OMP_NUM_THREADS")
DEFAULT_THREADS = 1


def read_thread_count(dotenv_path: Optional[Path] = None) -> int:
    """MSDCNN_THREADS desde el entorno o el .env (las variables ya definidas ganan)."""
    load_dotenv(dotenv_path=dotenv_path, override=False)
    raw = os.getenv("MSDCNN_THREADS", str(DEFAULT_THREADS))
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"invalid MSDCNN_THREADS value '{raw}'")
    if threads < 1:
        raise ValueError(f"MSDCNN_THREADS must be >= 1, got {threads}")
    return threads


def apply_thread_limits(threads: int) -> None:
    """Debe llamarse antes de importar numpy para que BLAS lo respete."""
    for var in THREAD_VARIABLES:
        os.environ.setdefault(var, str(threads))
