"""
training/augment.py
Aumento de datos por rotación y volteo: los 8 elementos del grupo diedral D₄.
Son permutaciones exactas de píxeles, sin interpolación.
"""

from enum import Enum
from typing import Tuple

import numpy as np


class Transform(Enum):
    """rotK = K·90° antihorario; FLIP_H_ROTK = rotK aplicado tras el volteo horizontal."""
    IDENTITY = "identity"
    ROT90 = "rot90"
    ROT180 = "rot180"
    ROT270 = "rot270"
    FLIP_H = "flip_h"
    FLIP_H_ROT90 = "flip_h+rot90"
    FLIP_H_ROT180 = "flip_h+rot180"
    FLIP_H_ROT270 = "flip_h+rot270"


_ROTATIONS = {
    Transform.IDENTITY: (False, 0), Transform.ROT90: (False, 1),
    Transform.ROT180: (False, 2), Transform.ROT270: (False, 3),
    Transform.FLIP_H: (True, 0), Transform.FLIP_H_ROT90: (True, 1),
    Transform.FLIP_H_ROT180: (True, 2), Transform.FLIP_H_ROT270: (True, 3),
}


def dihedral_transforms() -> Tuple[Transform, ...]:
    return tuple(Transform)


def augment(image: np.ndarray, transform: Transform) -> np.ndarray:
    """Aplica la transformación sobre los dos últimos ejes (h, w)."""
    flip, quarter_turns = _ROTATIONS[transform]
    out = np.flip(image, axis=-1) if flip else image
    if quarter_turns:
        out = np.rot90(out, k=quarter_turns, axes=(-2, -1))
    return np.ascontiguousarray(out)
