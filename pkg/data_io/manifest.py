"""
data_io/manifest.py
Manifiestos de dataset: texto UTF-8, una entrada por línea

    <split>\t<ruta-relativa>[\t<nombre>]

Las líneas vacías y las que empiezan por '#' se ignoran.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from tensor_core.errors import ManifestError

logger = logging.getLogger(__name__)


class Split(Enum):
    TRAIN = "train"
    VAL = "val"
    TEST = "test"


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    split: Split
    name: Optional[str] = None

    @property
    def display_name(self) -> str:
        return self.name or Path(self.path).stem


@dataclass
class DatasetManifest:
    entries: List[ManifestEntry] = field(default_factory=list)
    base_dir: Path = Path(".")

    def split(self, split: Split) -> List[ManifestEntry]:
        return [e for e in self.entries if e.split == split]

    def resolve(self, entry: ManifestEntry) -> Path:
        return (self.base_dir / entry.path).resolve()

    def __len__(self) -> int:
        return len(self.entries)


def load_manifest(path: Path) -> DatasetManifest:
    """
    Lee un manifiesto. Las rutas son relativas a su directorio.

    Las líneas mal formadas se saltan con un aviso; una misma ruta en dos
    splits distintos es un error.
    """
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")

    entries: List[ManifestEntry] = []
    seen: Dict[str, Split] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = raw.rstrip("\r\n").split("\t")
        if len(parts) not in (2, 3) or not parts[1].strip():
            logger.warning(f"⚠️ {path.name}:{lineno}: malformed entry skipped")
            continue
        try:
            split = Split(parts[0].strip())
        except ValueError:
            logger.warning(f"⚠️ {path.name}:{lineno}: unknown split '{parts[0].strip()}' skipped")
            continue
        rel = parts[1].strip()
        previous = seen.get(rel)
        if previous is not None and previous != split:
            raise ManifestError(f"{path}:{lineno}: '{rel}' listed in both '{previous.value}' and '{split.value}'")
        if previous is None:
            seen[rel] = split
            name = parts[2].strip() if len(parts) == 3 and parts[2].strip() else None
            entries.append(ManifestEntry(rel, split, name))

    manifest = DatasetManifest(entries, path.parent)
    missing = [e.path for e in entries if not manifest.resolve(e).exists()]
    if missing:
        raise ManifestError(f"{path}: {len(missing)} listed file(s) do not exist, first: {missing[0]}")
    logger.info(f"📂 Manifest {path.name}: " + ", ".join(
        f"{s.value}={len(manifest.split(s))}" for s in Split))
    return manifest


def write_manifest(manifest: DatasetManifest, path: Path) -> Path:
    path = Path(path)
    lines = []
    for e in manifest.entries:
        fields = [e.split.value, e.path] + ([e.name] if e.name else [])
        lines.append("\t".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
