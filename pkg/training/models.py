"""
training/models.py
Modelos de datos del entrenamiento: plan, fases de learning rate, estado de
Adam e historial por época.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from tensor_core.errors import ConfigError


# ============================================================
# PLAN DE ENTRENAMIENTO
# ============================================================

@dataclass(frozen=True)
class LrPhase:
    """Learning rate constante para las épocas first..last (inclusive)."""
    first: int
    last: int
    rate: float

    def encode(self) -> str:
        return f"{self.first}-{self.last}:{self.rate:g}"

    @classmethod
    def decode(cls, text: str) -> "LrPhase":
        try:
            span, rate = text.strip().split(":")
            first, last = span.split("-")
            return cls(int(first), int(last), float(rate))
        except ValueError:
            raise ConfigError(f"invalid lr phase '{text}', expected 'first-last:rate'")


DEFAULT_LR_PHASES: Tuple[LrPhase, ...] = (
    LrPhase(1, 50, 1e-3),
    LrPhase(51, 80, 1e-4),
    LrPhase(81, 100, 1e-5),
)

PRECISIONS = ("float32", "float64")


@dataclass(frozen=True)
class TrainPlan:
    """
    Hiperparámetros de optimización. Una época son `patches_per_epoch`
    parches aleatorios en lotes de `batch_size`.
    """
    epochs: int = 100
    lr_phases: Tuple[LrPhase, ...] = DEFAULT_LR_PHASES
    batch_size: int = 64
    patch_size: int = 96
    patches_per_epoch: int = 6400
    seed: int = 0
    augmentation_enabled: bool = True
    precision: str = "float32"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        for name in ("epochs", "batch_size", "patch_size", "patches_per_epoch"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.precision not in PRECISIONS:
            raise ConfigError(f"precision must be one of {PRECISIONS}, got '{self.precision}'")
        if not self.lr_phases:
            raise ConfigError("lr_phases cannot be empty")
        expected_first = 1
        for phase in self.lr_phases:
            if phase.rate <= 0:
                raise ConfigError(f"learning rate must be positive, got {phase.rate}")
            if phase.first != expected_first or phase.last < phase.first:
                raise ConfigError(
                    f"lr phases must be contiguous from epoch 1: phase {phase.encode()} "
                    f"should start at {expected_first}")
            expected_first = phase.last + 1
        if expected_first - 1 != self.epochs:
            raise ConfigError(f"lr phases cover epochs 1..{expected_first - 1}, plan has {self.epochs}")

    @property
    def steps_per_epoch(self) -> int:
        return max(1, self.patches_per_epoch // self.batch_size)

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(self.precision)


# ============================================================
# ESTADO DE ADAM
# ============================================================

@dataclass
class AdamState:
    """Momentos por parámetro (inicializados a cero en el primer paso) y contador t."""
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


# ============================================================
# HISTORIAL
# ============================================================

@dataclass
class EpochRecord:
    epoch: int
    lr: float
    loss: float
    val_psnr: float
    val_ssim: float
    wall_time: float = 0.0

    def to_line(self) -> str:
        """Registro de log (sin tiempo de pared, para que el fichero sea reproducible)."""
        data = {k: v for k, v in asdict(self).items() if k != "wall_time"}
        return json.dumps(data)


@dataclass
class TrainHistory:
    """Un registro por época completada."""
    records: List[EpochRecord] = field(default_factory=list)

    def append(self, record: EpochRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def last(self) -> Optional[EpochRecord]:
        return self.records[-1] if self.records else None

    def write(self, path: Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("".join(r.to_line() + "\n" for r in self.records), encoding="utf-8")

    @classmethod
    def read(cls, path: Path) -> "TrainHistory":
        history = cls()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                history.append(EpochRecord(**json.loads(line)))
        return history
