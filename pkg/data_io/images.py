"""
data_io/images.py
Lectura y escritura de imágenes en escala de grises.

- PGM binario: P5 (gris) y P6 (color, convertido a luminancia), 8 o 16 bits.
- PNG opcional a través de pypng (flag PNG_SUPPORTED).
- Relleno por reflexión hasta múltiplos de B y recorte inverso.
"""

import logging
import re
from pathlib import Path
from typing import Tuple

import numpy as np

from tensor_core.errors import DimensionError, TruncatedImageError, UnsupportedImageFormatError
from tensor_core.tensor import Tensor

try:
    import png
    PNG_SUPPORTED = True
except ImportError:  # pragma: no cover - depende del entorno
    png = None
    PNG_SUPPORTED = False

logger = logging.getLogger(__name__)

PGM_MAGICS = {b"P5": 1, b"P6": 3}

# Luminancia de la convención ITU-R BT.601 usada en los protocolos de CS
LUMA_WEIGHTS = (65.481, 128.553, 24.966)
LUMA_OFFSET = 16.0

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


# ============================================================
# PGM
# ============================================================

def _read_header(data: bytes, path: Path) -> Tuple[int, int, int, int, int]:
    """Devuelve (canales, ancho, alto, maxval, offset de los píxeles)."""
    magic = data[:2]
    if magic not in PGM_MAGICS:
        raise UnsupportedImageFormatError(f"{path}: unsupported image format (magic {magic!r})")
    pos = 2
    values = []
    for _ in range(3):
        match = _TOKEN.match(data, pos)
        if match is None:
            raise TruncatedImageError(f"{path}: header ends early")
        try:
            values.append(int(match.group(1)))
        except ValueError:
            raise UnsupportedImageFormatError(f"{path}: malformed header token {match.group(1)!r}")
        pos = match.end()
    width, height, maxval = values
    if width < 1 or height < 1:
        raise UnsupportedImageFormatError(f"{path}: invalid size {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise UnsupportedImageFormatError(f"{path}: invalid maxval {maxval}")
    if pos >= len(data):
        raise TruncatedImageError(f"{path}: no pixel data after header")
    # exactamente un byte de espacio separa la cabecera de los píxeles
    return PGM_MAGICS[magic], width, height, maxval, pos + 1


def _read_pgm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    channels, width, height, maxval, offset = _read_header(data, path)
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    expected = width * height * channels * dtype.itemsize
    payload = data[offset:offset + expected]
    if len(payload) < expected:
        raise TruncatedImageError(f"{path}: expected {expected} bytes of pixels, found {len(payload)}")
    pixels = np.frombuffer(payload, dtype=dtype).astype(np.float64) / maxval
    if channels == 1:
        return pixels.reshape(height, width)
    return luminance(pixels.reshape(height, width, 3))


def _write_pgm(path: Path, image: np.ndarray) -> None:
    h, w = image.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    path.write_bytes(header + quantize(image).tobytes())


# ============================================================
# PNG (opcional)
# ============================================================

def _require_png(path: Path) -> None:
    if not PNG_SUPPORTED:
        raise UnsupportedImageFormatError(f"{path}: PNG support requires the 'pypng' package")


def _read_png(path: Path) -> np.ndarray:
    _require_png(path)
    try:
        width, height, rows, info = png.Reader(filename=str(path)).asDirect()
        pixels = np.vstack([np.asarray(row, dtype=np.float64) for row in rows])
    except png.FormatError as e:
        raise TruncatedImageError(f"{path}: {e}")
    planes = info["planes"]
    pixels = pixels.reshape(height, width, planes) / (2 ** info["bitdepth"] - 1)
    if info.get("alpha"):
        pixels = pixels[..., :-1]
    if info.get("greyscale"):
        return pixels[..., 0]
    return luminance(pixels)


def _write_png(path: Path, image: np.ndarray) -> None:
    _require_png(path)
    h, w = image.shape
    with open(path, "wb") as f:
        png.Writer(w, h, greyscale=True, bitdepth=8).write(f, quantize(image).tolist())


# ============================================================
# API PÚBLICA
# ============================================================

def luminance(rgb: np.ndarray) -> np.ndarray:
    """RGB en [0,1] (h, w, 3) -> Y en [0,1]."""
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    wr, wg, wb = LUMA_WEIGHTS
    y = wr * r + wg * g + wb * b + LUMA_OFFSET
    return np.clip(y / 255.0, 0.0, 1.0)


def quantize(image: np.ndarray) -> np.ndarray:
    """[0,1] -> uint8 con redondeo al más cercano y recorte."""
    return np.clip(np.rint(np.asarray(image, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def _suffix(path: Path) -> str:
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm", ".ppm"):
        return "pgm"
    if suffix == ".png":
        return "png"
    raise UnsupportedImageFormatError(f"{path}: unsupported image format '{path.suffix}'")


def load_grayscale(path: Path) -> Tensor:
    """Carga una imagen como Tensor [1,1,H,W] con valores en [0,1]."""
    path = Path(path)
    kind = _suffix(path)
    if not path.exists():
        raise FileNotFoundError(f"image not found: {path}")
    image = _read_pgm(path) if kind == "pgm" else _read_png(path)
    logger.debug(f"Loaded {path.name} ({image.shape[0]}x{image.shape[1]})")
    return Tensor.from_image(image)


def save_grayscale(path: Path, image) -> Path:
    """Guarda un plano 2D (o un Tensor, elemento 0) como imagen de 8 bits."""
    path = Path(path)
    plane = image.image(0) if isinstance(image, Tensor) else np.asarray(image)
    if plane.ndim != 2:
        raise DimensionError("rank", 2, plane.ndim, "save_grayscale")
    kind = _suffix(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if kind == "pgm":
        _write_pgm(path, plane)
    else:
        _write_png(path, plane)
    logger.info(f"💾 Image saved: {path}")
    return path


def pad_to_multiple(image: Tensor, B: int) -> Tuple[Tensor, Tuple[int, int]]:
    """Relleno por reflexión abajo/derecha hasta el siguiente múltiplo de B."""
    if B < 1:
        raise ValueError(f"block size must be >= 1, got {B}")
    _, _, h, w = image.dims
    pad_h = -h % B
    pad_w = -w % B
    if not pad_h and not pad_w:
        return image, (h, w)
    # 'symmetric' no exige que el relleno sea menor que el lado (útil para imágenes pequeñas)
    mode = "reflect" if pad_h < h and pad_w < w else "symmetric"
    padded = np.pad(image.data, ((0, 0), (0, 0), (0, pad_h), (0, pad_w)), mode=mode)
    return Tensor(padded), (h, w)


def crop_to_dims(image: Tensor, dims: Tuple[int, int]) -> Tensor:
    h, w = dims
    _, _, H, W = image.dims
    if h > H or w > W:
        raise DimensionError("height/width", f"<= {H}x{W}", f"{h}x{w}", "crop_to_dims")
    return Tensor(np.ascontiguousarray(image.data[:, :, :h, :w]))
