import io
import math
from types import SimpleNamespace

import numpy as np
import pytest

import metrics.timing as timing
from data_io.manifest import Split, load_manifest
from metrics.quality import psnr, ssim
from metrics.report import (ImageScore, QualityReport, evaluate_image, evaluate_manifest, format_report,
                            read_report, write_report)
from msdcnn.models import NetworkConfig
from msdcnn.network import build_network
from tensor_core.errors import ConfigError, DimensionError, GeometryError
from tensor_core.tensor import Tensor


# ============================================================
# PSNR
# ============================================================

def test_identical_images_give_infinite_psnr(rng):
    a = rng.random((8, 8)) * 255
    assert psnr(a, a) == math.inf


def test_psnr_fixtures():
    a = np.zeros((4, 4))
    assert psnr(a, a + 1.0) == pytest.approx(48.1308, abs=1e-4)
    assert psnr(a, a + 16.0) == pytest.approx(20 * math.log10(255 / 16), abs=1e-4)
    assert psnr(a, a + 16.0) == pytest.approx(24.0484, abs=1e-4)


def test_psnr_is_symmetric_and_decreases_with_noise(rng):
    a = rng.random((16, 16)) * 255
    noise = rng.standard_normal((16, 16))
    assert psnr(a, a + noise) == psnr(a + noise, a)
    values = [psnr(a, a + amp * noise) for amp in (0.5, 1.0, 2.0, 4.0)]
    assert values == sorted(values, reverse=True)


def test_psnr_rejects_dim_mismatch():
    with pytest.raises(DimensionError):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


# ============================================================
# SSIM
# ============================================================

def test_ssim_of_identical_images_is_one(rng):
    a = rng.random((32, 32)) * 255
    assert ssim(a, a) == 1.0


def test_ssim_constant_images_closed_form():
    c, d = 100.0, 20.0
    C1 = (0.01 * 255) ** 2
    expected = (2 * c * (c + d) + C1) / (c ** 2 + (c + d) ** 2 + C1)
    value = ssim(np.full((24, 24), c), np.full((24, 24), c + d))
    assert value == pytest.approx(expected, abs=1e-10)


def test_inverted_high_variance_image_has_negative_ssim(rng):
    a = rng.integers(0, 2, (32, 32)) * 255.0
    assert ssim(a, 255.0 - a) < 0


def test_ssim_is_symmetric_and_bounded(rng):
    a = rng.random((20, 20)) * 255
    b = np.clip(a + rng.standard_normal((20, 20)) * 30, 0, 255)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)
    assert -1.0 <= ssim(a, b) <= 1.0


def test_ssim_needs_window_sized_images():
    with pytest.raises(GeometryError):
        ssim(np.zeros((10, 20)), np.zeros((10, 20)))


# ============================================================
# TIEMPOS
# ============================================================

def test_time_reconstruction_returns_median(monkeypatch):
    ticks = iter([0.0, 0.005, 1.0, 1.001, 2.0, 2.004, 3.0, 3.002, 4.0, 4.003])
    monkeypatch.setattr(timing, "time", SimpleNamespace(perf_counter=lambda: next(ticks)))
    monkeypatch.setattr(timing, "forward", lambda net, image: None)
    assert timing.time_reconstruction(None, None, repeats=5) == pytest.approx(3.0)


def test_time_reconstruction_needs_three_repeats():
    with pytest.raises(ConfigError, match="repeats"):
        timing.time_reconstruction(None, None, repeats=2)


# ============================================================
# INFORMES
# ============================================================

def _report() -> QualityReport:
    return QualityReport([ImageScore("a", 0.1, 30.0, 0.8, 10.0), ImageScore("b", 0.1, 26.0, 0.6, 14.0),
                          ImageScore("c", 0.1, 25.0, 0.7, 12.0)])


def test_report_has_rows_plus_mean_and_parses_back():
    text = format_report(_report())
    lines = text.splitlines()
    assert lines[0] == "name\tmr\tpsnr\tssim\tms"
    assert len(lines) == 5
    assert lines[-1].startswith("MEAN\t0.1\t27.0000\t0.700000\t12.000")
    parsed = read_report(text)
    assert [r.name for r in parsed.rows] == ["a", "b", "c"]
    assert parsed.mean_psnr == pytest.approx(27.0)


def test_write_report_goes_to_stream():
    out = io.StringIO()
    write_report(_report(), out)
    assert out.getvalue() == format_report(_report())


def test_read_report_requires_header():
    with pytest.raises(ValueError):
        read_report("a\t0.1\t1\t1\t1\n")


def test_evaluate_image_crops_padding(micro_config, rng):
    net = build_network(micro_config, 0)
    image = Tensor.from_image(rng.random((18, 13)))
    score, recon = evaluate_image(net, image, "odd")
    assert recon.dims == (1, 1, 18, 13)
    assert score.name == "odd" and score.mr == 0.25
    assert math.isfinite(score.psnr) and -1.0 <= score.ssim <= 1.0
    assert score.ms >= 0.0


def test_evaluate_manifest_scores_test_split(dataset):
    net = build_network(NetworkConfig(measurement_rate=0.25, block_size=4, mfe_channels=1, layers_per_channel=1,
                                      filters_per_layer=2, fusion_filters=2), 0)
    report = evaluate_manifest(net, load_manifest(dataset), Split.TEST)
    assert [r.name for r in report.rows] == ["pic0", "pic1", "pic2"]
    assert report.mean_ssim == pytest.approx(sum(r.ssim for r in report.rows) / 3)
