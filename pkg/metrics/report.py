"""
metrics/report.py
Evaluación de imágenes completas y el informe tabulado de calidad
(una fila por imagen: name, mr, psnr, ssim, ms + fila MEAN).
"""

import logging
import math
import statistics
import time
from dataclasses import dataclass, field
from typing import List, Optional, TextIO, Tuple

from data_io.images import crop_to_dims, load_grayscale, pad_to_multiple
from data_io.manifest import DatasetManifest, Split
from metrics.quality import PEAK, psnr, ssim
from metrics.timing import MIN_REPEATS, time_reconstruction
from msdcnn.network import Network, forward
from tensor_core.errors import ManifestError
from tensor_core.tensor import Tensor

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("name", "mr", "psnr", "ssim", "ms")
MEAN_ROW = "MEAN"


@dataclass(frozen=True)
class ImageScore:
    name: str
    mr: float
    psnr: float
    ssim: float
    ms: float


@dataclass
class QualityReport:
    rows: List[ImageScore] = field(default_factory=list)

    def add(self, score: ImageScore) -> None:
        self.rows.append(score)

    def __len__(self) -> int:
        return len(self.rows)

    def _mean(self, attr: str) -> float:
        if not self.rows:
            return math.nan
        return statistics.fmean(getattr(r, attr) for r in self.rows)

    @property
    def mean_psnr(self) -> float:
        return self._mean("psnr")

    @property
    def mean_ssim(self) -> float:
        return self._mean("ssim")

    @property
    def mean_ms(self) -> float:
        return self._mean("ms")

    @property
    def mr(self) -> float:
        return self.rows[0].mr if self.rows else math.nan


# ============================================================
# SERIALIZACIÓN
# ============================================================

def _row(name: str, mr: float, p: float, s: float, ms: float) -> str:
    return f"{name}\t{mr:g}\t{p:.4f}\t{s:.6f}\t{ms:.3f}"


def format_report(report: QualityReport) -> str:
    lines = ["\t".join(REPORT_COLUMNS)]
    lines += [_row(r.name, r.mr, r.psnr, r.ssim, r.ms) for r in report.rows]
    lines.append(_row(MEAN_ROW, report.mr, report.mean_psnr, report.mean_ssim, report.mean_ms))
    return "\n".join(lines) + "\n"


def write_report(report: QualityReport, out: TextIO) -> None:
    out.write(format_report(report))


def read_report(text: str) -> QualityReport:
    """Lee un informe; la fila MEAN se ignora (las medias se recalculan)."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or tuple(lines[0].split("\t")) != REPORT_COLUMNS:
        raise ValueError(f"report header must be {' '.join(REPORT_COLUMNS)}")
    report = QualityReport()
    for line in lines[1:]:
        name, mr, p, s, ms = line.split("\t")
        if name == MEAN_ROW:
            continue
        report.add(ImageScore(name, float(mr), float(p), float(s), float(ms)))
    return report


# ============================================================
# EVALUACIÓN
# ============================================================

def reconstruct_image(net: Network, image: Tensor) -> Tensor:
    """Rellena hasta múltiplos de B, reconstruye y recorta a las dims originales."""
    padded, dims = pad_to_multiple(image, net.config.block_size)
    return crop_to_dims(forward(net, padded), dims)


def evaluate_image(net: Network, image: Tensor, name: str = "image",
                   repeats: int = 1) -> Tuple[ImageScore, Tensor]:
    """
    Puntúa una imagen en la escala 0–255 sobre el área original (sin relleno).
    Con repeats >= 3 el tiempo es la mediana de time_reconstruction; si no,
    el de la única pasada.
    """
    padded, dims = pad_to_multiple(image, net.config.block_size)
    start = time.perf_counter()
    out = forward(net, padded)
    ms = (time.perf_counter() - start) * 1000.0
    if repeats >= MIN_REPEATS:
        ms = time_reconstruction(net, padded, repeats)
    recon = crop_to_dims(out, dims)
    reference = image.image(0) * PEAK
    estimate = recon.image(0) * PEAK
    score = ImageScore(name, net.config.measurement_rate, psnr(reference, estimate), ssim(reference, estimate), ms)
    return score, recon


def evaluate_manifest(net: Network, manifest: DatasetManifest, split: Split = Split.TEST,
                      repeats: int = 1, limit: Optional[int] = None) -> QualityReport:
    entries = manifest.split(split)
    if not entries:
        raise ManifestError(f"no '{split.value}' entries in manifest {manifest.base_dir}")
    report = QualityReport()
    for entry in entries[:limit]:
        score, _ = evaluate_image(net, load_grayscale(manifest.resolve(entry)), entry.display_name, repeats)
        logger.debug(f"{score.name}: {score.psnr:.2f} dB / {score.ssim:.4f}")
        report.add(score)
    logger.info(f"📊 {split.value}: mean PSNR {report.mean_psnr:.2f} dB, mean SSIM {report.mean_ssim:.4f} "
                f"over {len(report)} image(s)")
    return report
