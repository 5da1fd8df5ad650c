"""
training/trainer.py
Bucle de entrenamiento conjunto (medida + reconstrucción) con Adam, el
calendario de learning rate por fases y validación PSNR/SSIM por época.

Se devuelve el checkpoint de la ÚLTIMA época, no el mejor.
"""

import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from data_io.checkpoint import Checkpoint, save_checkpoint
from data_io.images import load_grayscale
from data_io.manifest import DatasetManifest, Split
from metrics.quality import PEAK, psnr
from metrics.report import evaluate_image
from msdcnn.models import NetworkConfig
from msdcnn.network import Network, build_network, forward, loss_and_grads
from tensor_core.errors import ManifestError, NonFiniteGradientError, TrainingDivergedError
from tensor_core.tensor import Tensor
from training.models import AdamState, EpochRecord, TrainHistory, TrainPlan
from training.optimizer import adam_step
from training.patches import PatchSampler
from training.schedule import lr_at_epoch

logger = logging.getLogger(__name__)


def _validation_images(manifest: DatasetManifest) -> List[Tuple[str, Tensor]]:
    entries = manifest.split(Split.VAL)
    if not entries:
        raise ManifestError(f"validation manifest has no 'val' entries ({manifest.base_dir})")
    return [(e.display_name, load_grayscale(manifest.resolve(e))) for e in entries]


def validate(net: Network, images: List[Tuple[str, Tensor]]) -> Tuple[float, float]:
    """Media de PSNR y SSIM sobre las imágenes de validación completas."""
    scores = [evaluate_image(net, image, name)[0] for name, image in images]
    return statistics.fmean(s.psnr for s in scores), statistics.fmean(s.ssim for s in scores)


def _diverged(net_snapshot: Checkpoint, epoch: int, step: int, checkpoint_path: Optional[Path]) -> TrainingDivergedError:
    logger.error(f"❌ Training diverged at epoch {epoch}, step {step}; keeping epoch {net_snapshot.epoch}")
    if checkpoint_path is not None:
        save_checkpoint(net_snapshot, checkpoint_path)
    return TrainingDivergedError(epoch, step, net_snapshot)


def train(config: NetworkConfig, plan: TrainPlan, train_manifest: DatasetManifest, val_manifest: DatasetManifest,
          checkpoint_path: Optional[Path] = None,
          history_path: Optional[Path] = None) -> Tuple[Checkpoint, TrainHistory]:
    """
    Minimiza ‖X* − X‖² sobre parches respecto a TODOS los parámetros (también w₁).

    Si la pérdida o un gradiente dejan de ser finitos se aborta y se guarda el
    último checkpoint sano (fin de la época anterior).
    """
    sampler = PatchSampler(train_manifest, plan.patch_size, config.block_size, plan.augmentation_enabled)
    val_images = _validation_images(val_manifest)
    net = build_network(config, plan.seed, dtype=plan.dtype)
    state = AdamState()
    rng = np.random.default_rng(plan.seed)
    batch_size = min(plan.batch_size, plan.patches_per_epoch)
    history = TrainHistory()
    last_good = Checkpoint.from_network(net, 0, plan.seed)

    logger.info(f"🚀 Training {config.mfe_channels}-channel MsDCNN at MR={config.measurement_rate}: "
                f"{plan.epochs} epoch(s) × {plan.steps_per_epoch} step(s) of {batch_size} patches")

    for epoch in range(1, plan.epochs + 1):
        lr = lr_at_epoch(plan, epoch)
        start = time.perf_counter()
        losses = []
        for step in range(1, plan.steps_per_epoch + 1):
            batch = sampler.sample(batch_size, rng)
            loss, grads = loss_and_grads(net, batch)
            if not math.isfinite(loss):
                raise _diverged(last_good, epoch, step, checkpoint_path)
            try:
                adam_step(net.params, grads, state, lr)
            except NonFiniteGradientError as e:
                logger.error(f"❌ {e}")
                raise _diverged(last_good, epoch, step, checkpoint_path) from e
            losses.append(loss)
            logger.debug(f"epoch {epoch} step {step}: loss {loss:.6f}")

        val_psnr, val_ssim = validate(net, val_images)
        record = EpochRecord(epoch, lr, statistics.fmean(losses), val_psnr, val_ssim, time.perf_counter() - start)
        history.append(record)
        if history_path is not None:
            history.write(history_path)
        last_good = Checkpoint.from_network(net, epoch, plan.seed)
        logger.info(f"📊 Epoch {epoch}/{plan.epochs} lr={lr:g} loss={record.loss:.6f} "
                    f"val PSNR={val_psnr:.2f} dB SSIM={val_ssim:.4f} ({record.wall_time:.1f}s)")

    if checkpoint_path is not None:
        save_checkpoint(last_good, checkpoint_path)
    logger.info("✅ Training finished")
    return last_good, history


# ============================================================
# SOBREAJUSTE DE UNA SOLA IMAGEN
# ============================================================

@dataclass
class OverfitResult:
    net: Network
    losses: List[float] = field(default_factory=list)
    psnr: float = 0.0


def overfit_single_image(config: NetworkConfig, image: Tensor, steps: int, lr: float = 1e-3, seed: int = 0,
                         dtype=np.float64, target_psnr: Optional[float] = None) -> OverfitResult:
    """
    Entrena sobre una única imagen (tamaño múltiplo de B) y mide el PSNR final.

    Con target_psnr se para en cuanto la red alcanza ese PSNR (a lo sumo `steps` pasos).
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    net = build_network(config, seed, dtype=dtype)
    state = AdamState()
    result = OverfitResult(net)
    pixels = image.dims[2] * image.dims[3]
    for step in range(1, steps + 1):
        loss, grads = loss_and_grads(net, image)
        if not math.isfinite(loss):
            raise TrainingDivergedError(0, step)
        # pérdida = Σdiff²/2 sobre una imagen en [0, 1]
        if target_psnr is not None and (loss == 0 or -10.0 * math.log10(2.0 * loss / pixels) >= target_psnr):
            if _image_psnr(net, image) >= target_psnr:
                break
        adam_step(net.params, grads, state, lr)
        result.losses.append(loss)
    result.psnr = _image_psnr(net, image)
    logger.info(f"🎯 Overfit {len(result.losses)} step(s), seed {seed}: {result.psnr:.2f} dB")
    return result


def _image_psnr(net: Network, image: Tensor) -> float:
    return psnr(image.image(0) * PEAK, forward(net, image).image(0) * PEAK)
