"""
training/schedule.py
Calendario de learning rate por fases (1e-3 / 1e-4 / 1e-5 por defecto).
"""

from typing import List, Tuple

from tensor_core.errors import ConfigError
from training.models import DEFAULT_LR_PHASES, LrPhase, TrainPlan

# Reparto 50 % / 30 % / 20 % del calendario por defecto
PHASE_FRACTIONS = (0.5, 0.8, 1.0)


def lr_at_epoch(plan: TrainPlan, epoch: int) -> float:
    if not 1 <= epoch <= plan.epochs:
        raise ConfigError(f"epoch {epoch} outside 1..{plan.epochs}")
    for phase in plan.lr_phases:
        if phase.first <= epoch <= phase.last:
            return phase.rate
    raise ConfigError(f"no lr phase covers epoch {epoch}")


def scaled_phases(epochs: int) -> Tuple[LrPhase, ...]:
    """Reescala las tres fases por defecto a un presupuesto de `epochs` épocas."""
    if epochs < 1:
        raise ConfigError(f"epochs must be >= 1, got {epochs}")
    phases: List[LrPhase] = []
    start = 1
    for i, (fraction, default) in enumerate(zip(PHASE_FRACTIONS, DEFAULT_LR_PHASES)):
        end = epochs if i == len(PHASE_FRACTIONS) - 1 else round(epochs * fraction)
        if i == 0:
            end = max(end, 1)
        if end >= start:
            phases.append(LrPhase(start, end, default.rate))
            start = end + 1
    return tuple(phases)


def scaled_plan(epochs: int, **kwargs) -> TrainPlan:
    return TrainPlan(epochs=epochs, lr_phases=scaled_phases(epochs), **kwargs)
