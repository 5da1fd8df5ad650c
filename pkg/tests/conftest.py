"""Fixtures compartidas: redes micro, imágenes PGM temporales y manifiestos."""

from pathlib import Path
from typing import Callable

import numpy as np
import pytest

from msdcnn.models import NetworkConfig


def write_pgm(path: Path, pixels: np.ndarray) -> Path:
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w = pixels.shape
    path.write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes())
    return path


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def micro_config() -> NetworkConfig:
    """B = 4, L = 2, C = 2 y pocos filtros: suficiente para gradientes y humo."""
    return NetworkConfig(measurement_rate=0.25, block_size=4, mfe_channels=2, layers_per_channel=2,
                         filters_per_layer=4, fusion_filters=4)


@pytest.fixture
def pgm_factory(tmp_path) -> Callable[..., Path]:
    def make(name: str, pixels: np.ndarray) -> Path:
        return write_pgm(tmp_path / name, pixels)
    return make


@pytest.fixture
def dataset(tmp_path) -> Path:
    """Manifiesto con 3 imágenes de train, 1 de val y 3 de test (16×16 y 18×13)."""
    rng = np.random.default_rng(42)
    images = tmp_path / "images"
    images.mkdir()
    lines = []
    for i in range(3):
        write_pgm(images / f"train_{i}.pgm", rng.integers(0, 256, (16, 16)))
        lines.append(f"train\timages/train_{i}.pgm")
    write_pgm(images / "val_0.pgm", rng.integers(0, 256, (16, 16)))
    lines.append("val\timages/val_0.pgm")
    for i in range(3):
        write_pgm(images / f"test_{i}.pgm", rng.integers(0, 256, (18, 13) if i == 0 else (16, 16)))
        lines.append(f"test\timages/test_{i}.pgm\tpic{i}")
    manifest = tmp_path / "manifest.tsv"
    manifest.write_text("# split\tpath\tname\n" + "\n".join(lines) + "\n", encoding="utf-8")
    return manifest
