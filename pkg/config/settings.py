"""
config/settings.py
Configuración del toolkit.

- Ajustes de entorno (.env + variables MSDCNN_*) cargados con python-dotenv.
- Ficheros de experimento key=value cuyas claves son exactamente los campos
  de NetworkConfig y TrainPlan.
- Prioridad: valores por defecto < entorno < fichero < flags de la CLI.
"""

import io
import logging
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from msdcnn.models import MfePattern, NetworkConfig, decode_patterns, encode_patterns
from tensor_core.errors import ConfigError
from training.models import LrPhase, PRECISIONS, TrainPlan
from training.schedule import scaled_phases

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


# ============================================================
# ENTORNO (.env)
# ============================================================

@dataclass(frozen=True)
class EnvSettings:
    log_level: str = "INFO"
    seed: int = 0
    threads: int = 1
    precision: str = "float32"


def load_environment(dotenv_path: Optional[Path] = None) -> EnvSettings:
    """Carga .env (sin pisar variables ya definidas) y lee los ajustes MSDCNN_*."""
    load_dotenv(dotenv_path=dotenv_path, override=False)
    try:
        settings = EnvSettings(
            log_level=os.getenv("MSDCNN_LOG_LEVEL", "INFO").upper(),
            seed=int(os.getenv("MSDCNN_SEED", "0")),
            threads=int(os.getenv("MSDCNN_THREADS", "1")),
            precision=os.getenv("MSDCNN_PRECISION", "float32"),
        )
    except ValueError as e:
        raise ConfigError(f"invalid MSDCNN_* environment value: {e}")
    validate_environment(settings)
    return settings


def validate_environment(settings: EnvSettings) -> None:
    if settings.threads < 1:
        raise ConfigError(f"MSDCNN_THREADS must be >= 1, got {settings.threads}")
    if settings.precision not in PRECISIONS:
        raise ConfigError(f"MSDCNN_PRECISION must be one of {PRECISIONS}, got '{settings.precision}'")
    if not isinstance(logging.getLevelName(settings.log_level), int):
        raise ConfigError(f"MSDCNN_LOG_LEVEL '{settings.log_level}' is not a logging level")


def setup_logging(level: str = "INFO") -> None:
    """Todo el log va a stderr; stdout queda para informes y tablas."""
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT,
                        stream=sys.stderr, force=True)


# ============================================================
# FICHEROS DE EXPERIMENTO (key=value)
# ============================================================

NETWORK_KEYS = tuple(f.name for f in fields(NetworkConfig)) + ("pattern",)
PLAN_KEYS = tuple(f.name for f in fields(TrainPlan))
KNOWN_KEYS = frozenset(NETWORK_KEYS + PLAN_KEYS)
METADATA_KEYS = ("epoch", "seed")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def read_config_file(path: Path) -> Dict[str, str]:
    """Lee un fichero key=value y rechaza claves desconocidas."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {k: v for k, v in dotenv_values(path).items() if v is not None}
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s) in {path}: {', '.join(unknown)}")
    logger.debug(f"⚙️ Loaded {len(values)} setting(s) from {path.name}")
    return values


def _coerce(key: str, raw: str, kind: Any) -> Any:
    text = str(raw).strip()
    try:
        if kind is bool:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"invalid value for '{key}': '{raw}'")


def _typed(values: Mapping[str, Any], cls, skip: Tuple[str, ...] = ()) -> Dict[str, Any]:
    out = {}
    for f in fields(cls):
        if f.name in values and f.name not in skip:
            kind = f.type if isinstance(f.type, type) else str
            out[f.name] = _coerce(f.name, values[f.name], kind)
    return out


def build_network_config(values: Mapping[str, Any]) -> NetworkConfig:
    kwargs = _typed(values, NetworkConfig, skip=("channel_patterns",))
    if "channel_patterns" in values:
        kwargs["channel_patterns"] = decode_patterns(str(values["channel_patterns"]))
    elif "pattern" in values:
        try:
            pattern = MfePattern(str(values["pattern"]).strip().lower())
        except ValueError:
            raise ConfigError(f"invalid pattern '{values['pattern']}', use one of "
                              f"{', '.join(p.value for p in MfePattern)}")
        channels = kwargs.pop("mfe_channels", NetworkConfig.mfe_channels)
        return NetworkConfig.with_pattern(pattern, channels, **kwargs)
    return NetworkConfig(**kwargs)


def build_train_plan(values: Mapping[str, Any]) -> TrainPlan:
    kwargs = _typed(values, TrainPlan, skip=("lr_phases",))
    if "lr_phases" in values:
        kwargs["lr_phases"] = tuple(LrPhase.decode(p) for p in str(values["lr_phases"]).split(",") if p.strip())
    else:
        kwargs["lr_phases"] = scaled_phases(kwargs.get("epochs", TrainPlan.epochs))
    return TrainPlan(**kwargs)


# ============================================================
# CONFIGURACIÓN DE UNA EJECUCIÓN
# ============================================================

# flag de la CLI -> clave de configuración
OVERRIDE_KEYS = {"mr": "measurement_rate", "channels": "mfe_channels", "seed": "seed", "epochs": "epochs",
                 "pattern": "pattern"}


@dataclass
class RunConfig:
    """Subcomando + fichero de configuración + overrides de la línea de comandos."""
    subcommand: str
    config_path: Optional[Path] = None
    overrides: Dict[str, Any] = field(default_factory=dict)
    outputs: Dict[str, Path] = field(default_factory=dict)
    env: EnvSettings = field(default_factory=EnvSettings)

    def effective_values(self) -> Dict[str, str]:
        values: Dict[str, str] = {"seed": str(self.env.seed), "precision": self.env.precision}
        if self.config_path is not None:
            values.update(read_config_file(self.config_path))
        for flag, value in self.overrides.items():
            if value is not None:
                values[OVERRIDE_KEYS.get(flag, flag)] = str(value)
        # --channels manda sobre unos patrones explícitos con otro número de canales
        if self.overrides.get("channels") is not None and "channel_patterns" in values:
            if len(values["channel_patterns"].split("/")) != int(self.overrides["channels"]):
                values.pop("channel_patterns")
        return values

    def network_config(self) -> NetworkConfig:
        return build_network_config(self.effective_values())

    def train_plan(self) -> TrainPlan:
        return build_train_plan(self.effective_values())

    def seed(self) -> int:
        return _coerce("seed", self.effective_values()["seed"], int)

    def describe(self) -> str:
        values = self.effective_values()
        return ", ".join(f"{k}={values[k]}" for k in sorted(values))


# ============================================================
# TEXTO DE CONFIGURACIÓN EMBEBIDO (checkpoints)
# ============================================================

def config_to_text(config: NetworkConfig, metadata: Optional[Mapping[str, Any]] = None) -> str:
    """Serialización determinista key=value de NetworkConfig + metadatos."""
    lines = []
    for f in fields(NetworkConfig):
        value = getattr(config, f.name)
        if f.name == "channel_patterns":
            value = encode_patterns(value)
        lines.append(f"{f.name}={value!r}" if isinstance(value, float) else f"{f.name}={value}")
    for key in METADATA_KEYS:
        if metadata and key in metadata:
            lines.append(f"{key}={metadata[key]}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> Tuple[NetworkConfig, Dict[str, int]]:
    values = {k: v for k, v in dotenv_values(stream=io.StringIO(text)).items() if v is not None}
    metadata = {k: _coerce(k, values.pop(k), int) for k in METADATA_KEYS if k in values}
    unknown = sorted(set(values) - set(NETWORK_KEYS))
    if unknown:
        raise ConfigError(f"unknown key(s) in embedded config: {', '.join(unknown)}")
    return build_network_config(values), metadata
