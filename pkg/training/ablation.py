"""
training/ablation.py
Ablación de variantes MsDCNN (número de canales y patrón del MFE).

Cada variante cuenta sus parámetros y mide su tiempo de reconstrucción; si se
dan manifiestos, además se entrena con el MISMO plan y las MISMAS semillas que
las demás, de modo que las diferencias de PSNR se deben solo a la arquitectura.
"""

import logging
import math
import statistics
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from data_io.manifest import DatasetManifest
from metrics.timing import time_reconstruction
from msdcnn.models import NetworkConfig, preset
from msdcnn.network import build_network
from msdcnn.structure import count_parameters
from tensor_core.tensor import Tensor
from training.models import TrainPlan
from training.trainer import train

logger = logging.getLogger(__name__)

PATTERN_VARIANTS = ("msdcnn-2d", "msdcnn-2", "msdcnn-2c")
CHANNEL_VARIANTS = ("msdcnn-1", "msdcnn-2", "msdcnn-3")
ALL_VARIANTS = tuple(dict.fromkeys(PATTERN_VARIANTS + CHANNEL_VARIANTS))

TIMING_COLUMNS = ("variant", "mfe_params", "ms")
QUALITY_COLUMNS = ("val_psnr", "val_ssim")


@dataclass(frozen=True)
class VariantScore:
    name: str
    mfe_params: int
    ms: float
    seed_psnr: Tuple[float, ...] = ()
    seed_ssim: Tuple[float, ...] = ()

    @property
    def trained(self) -> bool:
        return bool(self.seed_psnr)

    @property
    def val_psnr(self) -> float:
        return statistics.fmean(self.seed_psnr) if self.seed_psnr else math.nan

    @property
    def val_ssim(self) -> float:
        return statistics.fmean(self.seed_ssim) if self.seed_ssim else math.nan


def variant_config(name: str, base: NetworkConfig) -> NetworkConfig:
    """El preset `name` con la geometría (MR, B, L, filtros) de `base`."""
    return preset(name, measurement_rate=base.measurement_rate, block_size=base.block_size,
                  layers_per_channel=base.layers_per_channel, filters_per_layer=base.filters_per_layer,
                  fusion_filters=base.fusion_filters, head_kernel=base.head_kernel)


def train_variant(config: NetworkConfig, plan: TrainPlan, train_manifest: DatasetManifest,
                  val_manifest: DatasetManifest, seeds: Sequence[int]) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """PSNR y SSIM de validación de la última época, una entrada por semilla."""
    psnrs, ssims = [], []
    for seed in seeds:
        _, history = train(config, replace(plan, seed=seed), train_manifest, val_manifest)
        psnrs.append(history.last.val_psnr)
        ssims.append(history.last.val_ssim)
    return tuple(psnrs), tuple(ssims)


def run_ablation(variants: Sequence[str], base: NetworkConfig, image_size: int = 256, repeats: int = 11,
                 plan: Optional[TrainPlan] = None, train_manifest: Optional[DatasetManifest] = None,
                 val_manifest: Optional[DatasetManifest] = None,
                 seeds: Sequence[int] = (0,)) -> List[VariantScore]:
    """
    Args:
        variants: nombres de preset, en el orden de la tabla
        base: geometría común a todas las variantes
        image_size: lado de la imagen aleatoria usada para medir tiempos
        repeats: repeticiones cronometradas (>= 3, mediana)
        plan: plan de entrenamiento compartido; sin plan ni manifiestos no se entrena
        seeds: semillas de entrenamiento (la semilla del plan se sustituye por cada una)

    Returns:
        Un VariantScore por variante
    """
    timing_seed = seeds[0] if seeds else 0
    image = Tensor.from_image(np.random.default_rng(timing_seed).random((image_size, image_size)))
    scores = []
    for name in variants:
        config = variant_config(name, base)
        ms = time_reconstruction(build_network(config, timing_seed), image, repeats)
        score = VariantScore(name, count_parameters(config), ms)
        if plan is not None and train_manifest is not None and val_manifest is not None:
            logger.info(f"🏋️ Training {name} over {len(seeds)} seed(s)")
            psnrs, ssims = train_variant(config, plan, train_manifest, val_manifest, seeds)
            score = replace(score, seed_psnr=psnrs, seed_ssim=ssims)
            logger.info(f"📊 {name}: mean val PSNR {score.val_psnr:.2f} dB, SSIM {score.val_ssim:.4f}")
        scores.append(score)
    return scores


def seed_wins(better: VariantScore, worse: VariantScore) -> int:
    """Semillas en las que `better` supera estrictamente a `worse` en PSNR."""
    return sum(a > b for a, b in zip(better.seed_psnr, worse.seed_psnr))


def format_ablation(scores: Sequence[VariantScore]) -> str:
    trained = any(s.trained for s in scores)
    columns = TIMING_COLUMNS + (QUALITY_COLUMNS if trained else ())
    lines = ["\t".join(columns)]
    for s in scores:
        row = f"{s.name}\t{s.mfe_params:,}\t{s.ms:.2f}"
        if trained:
            row += f"\t{s.val_psnr:.4f}\t{s.val_ssim:.6f}"
        lines.append(row)
    return "\n".join(lines) + "\n"
