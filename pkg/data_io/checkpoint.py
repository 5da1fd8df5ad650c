"""
data_io/checkpoint.py
Formato binario de checkpoint (little-endian):

    "MSDC" | u32 versión | u32 len + config UTF-8 key=value | u32 nº tensores
    por tensor: u16 len + nombre UTF-8 | u8 rango | u32 por dim | float32 row-major

La escritura es atómica (fichero temporal + os.replace).
"""

import logging
import os
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict

import numpy as np

from config.settings import config_to_text, parse_config_text
from msdcnn.models import NetworkConfig
from msdcnn.network import Network
from msdcnn.structure import param_shapes
from tensor_core.errors import (BadMagicError, CheckpointDimensionError, CheckpointError, ConfigError,
                                TruncatedCheckpointError, VersionMismatchError)

logger = logging.getLogger(__name__)

MAGIC = b"MSDC"
FORMAT_VERSION = 1
PAYLOAD_DTYPE = np.dtype("<f4")


@dataclass
class Checkpoint:
    config: NetworkConfig
    params: Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    epoch: int = 0
    seed: int = 0
    version: int = FORMAT_VERSION

    @classmethod
    def from_network(cls, net: Network, epoch: int = 0, seed: int = 0) -> "Checkpoint":
        params = OrderedDict((k, np.array(v, dtype=np.float32)) for k, v in net.params.items())
        return cls(net.config, params, epoch, seed)

    def to_network(self, dtype=np.float64) -> Network:
        return Network(self.config, {k: v.astype(dtype) for k, v in self.params.items()})


# ============================================================
# CODIFICACIÓN
# ============================================================

def encode_checkpoint(ckpt: Checkpoint) -> bytes:
    config_bytes = config_to_text(ckpt.config, {"epoch": ckpt.epoch, "seed": ckpt.seed}).encode("utf-8")
    chunks = [MAGIC, struct.pack("<I", ckpt.version), struct.pack("<I", len(config_bytes)), config_bytes,
              struct.pack("<I", len(ckpt.params))]
    for name, value in ckpt.params.items():
        name_bytes = name.encode("utf-8")
        chunks.append(struct.pack("<H", len(name_bytes)))
        chunks.append(name_bytes)
        chunks.append(struct.pack("<B", value.ndim))
        chunks.append(struct.pack(f"<{value.ndim}I", *value.shape))
        chunks.append(np.ascontiguousarray(value, dtype=PAYLOAD_DTYPE).tobytes())
    return b"".join(chunks)


class _Reader:
    """Cursor sobre los bytes; cualquier lectura más allá del final es truncamiento."""

    def __init__(self, data: bytes, source: str):
        self.data = data
        self.pos = 0
        self.source = source

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedCheckpointError(f"{self.source}: file ends while reading {what}")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def decode_checkpoint(data: bytes, source: str = "<bytes>") -> Checkpoint:
    reader = _Reader(data, source)
    if len(data) < len(MAGIC) or data[:len(MAGIC)] != MAGIC:
        raise BadMagicError(f"{source}: not a checkpoint (bad magic {data[:4]!r})")
    reader.take(len(MAGIC), "magic")
    (version,) = reader.unpack("<I", "version")
    if version != FORMAT_VERSION:
        raise VersionMismatchError(f"{source}: format version {version}, expected {FORMAT_VERSION}")

    (config_len,) = reader.unpack("<I", "config length")
    try:
        config, metadata = parse_config_text(reader.take(config_len, "config").decode("utf-8"))
    except (UnicodeDecodeError, ConfigError) as e:
        raise CheckpointError(f"{source}: invalid embedded config: {e}")
    expected = param_shapes(config)

    (count,) = reader.unpack("<I", "tensor count")
    params: Dict[str, np.ndarray] = OrderedDict()
    for _ in range(count):
        (name_len,) = reader.unpack("<H", "tensor name length")
        raw_name = reader.take(name_len, "tensor name")
        try:
            name = raw_name.decode("utf-8")
        except UnicodeDecodeError:
            raise CheckpointError(f"{source}: tensor name {raw_name!r} is not valid UTF-8")
        (rank,) = reader.unpack("<B", f"rank of '{name}'")
        dims = reader.unpack(f"<{rank}I", f"dims of '{name}'")
        if name in params:
            raise CheckpointError(f"{source}: tensor '{name}' appears twice")
        if name not in expected:
            raise CheckpointError(f"{source}: unexpected tensor '{name}' for the embedded config")
        if tuple(dims) != tuple(expected[name]):
            raise CheckpointDimensionError(
                f"{source}: tensor '{name}' has dims {tuple(dims)}, config requires {tuple(expected[name])}")
        size = int(np.prod(dims)) * PAYLOAD_DTYPE.itemsize
        payload = reader.take(size, f"payload of '{name}'")
        params[name] = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).reshape(dims).astype(np.float32)

    missing = [n for n in expected if n not in params]
    if missing:
        raise CheckpointError(f"{source}: missing tensor(s): {', '.join(missing)}")
    if reader.pos != len(data):
        raise CheckpointError(f"{source}: {len(data) - reader.pos} trailing byte(s) after last tensor")

    ordered = OrderedDict((n, params[n]) for n in expected)
    return Checkpoint(config, ordered, metadata.get("epoch", 0), metadata.get("seed", 0), version)


# ============================================================
# FICHEROS
# ============================================================

def save_checkpoint(ckpt: Checkpoint, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + f".tmp.{os.getpid()}")
    try:
        with open(tmp_path, "wb") as f:
            f.write(encode_checkpoint(ckpt))
        os.replace(tmp_path, path)
    finally:
        if tmp_path.exists():
            tmp_path.unlink()
    logger.info(f"💾 Checkpoint saved: {path} (epoch {ckpt.epoch})")
    return path


def load_checkpoint(path: Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path}")
    ckpt = decode_checkpoint(path.read_bytes(), str(path))
    logger.debug(f"Loaded checkpoint {path.name}: MR={ckpt.config.measurement_rate}, "
                 f"C={ckpt.config.mfe_channels}, epoch={ckpt.epoch}")
    return ckpt
