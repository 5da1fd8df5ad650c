"""
training/patches.py
Muestreo de parches aleatorios (con aumento diedral opcional) a partir de un
manifiesto. Las imágenes se decodifican una sola vez.
"""

import logging
from typing import List, Tuple

import numpy as np

from data_io.images import load_grayscale
from data_io.manifest import DatasetManifest, Split
from tensor_core.errors import ConfigError, ManifestError
from tensor_core.tensor import Tensor
from training.augment import augment, dihedral_transforms

logger = logging.getLogger(__name__)


class PatchSampler:
    """Recortes uniformes P×P de las imágenes de un split."""

    def __init__(self, manifest: DatasetManifest, patch_size: int, block_size: int = 32,
                 augmentation: bool = True, split: Split = Split.TRAIN):
        if patch_size < 1 or patch_size % block_size:
            raise ConfigError(f"patch_size {patch_size} must be a positive multiple of block size {block_size}")
        self.patch_size = patch_size
        self.augmentation = augmentation
        self.transforms = dihedral_transforms()
        self.images: List[Tuple[str, np.ndarray]] = []

        for entry in manifest.split(split):
            image = load_grayscale(manifest.resolve(entry)).image(0)
            h, w = image.shape
            if h < patch_size or w < patch_size:
                logger.warning(f"⚠️ {entry.display_name} ({h}x{w}) is smaller than the {patch_size}px patch, skipped")
                continue
            self.images.append((entry.display_name, image))

        if not self.images:
            raise ManifestError(f"no usable '{split.value}' images for {patch_size}px patches")
        logger.info(f"🧩 Patch sampler ready: {len(self.images)} image(s), {patch_size}px patches")

    def sample(self, count: int, rng: np.random.Generator) -> Tensor:
        P = self.patch_size
        batch = np.empty((count, 1, P, P), dtype=np.float64)
        for i in range(count):
            _, image = self.images[int(rng.integers(len(self.images)))]
            h, w = image.shape
            top = int(rng.integers(h - P + 1))
            left = int(rng.integers(w - P + 1))
            patch = image[top:top + P, left:left + P]
            if self.augmentation:
                patch = augment(patch, self.transforms[int(rng.integers(len(self.transforms)))])
            batch[i, 0] = patch
        return Tensor(batch)


def sample_patches(manifest: DatasetManifest, patch_size: int, count: int, seed: int,
                   block_size: int = 32, augmentation: bool = True) -> Tensor:
    """Lote (count, 1, P, P) determinista para una semilla dada."""
    sampler = PatchSampler(manifest, patch_size, block_size, augmentation)
    return sampler.sample(count, np.random.default_rng(seed))
