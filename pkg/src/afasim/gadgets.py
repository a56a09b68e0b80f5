"""Small linear building blocks.

These are plain (not affinized) object matrices; compose them first and
pass the product through :func:`afasim.core.affinize`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field import NumericField


@dataclass(frozen=True, eq=False)
class Gadget:
    matrix: np.ndarray
    description: str

    def __post_init__(self):
        n, m = self.matrix.shape
        if n != m or n not in (2, 3):
            raise ValueError(f"gadget must be 2x2 or 3x3, got {n}x{m}")


def _mat(rows, field: NumericField | None) -> np.ndarray:
    field = field or NumericField.exact()
    return np.array([[field(x) for x in row] for row in rows], dtype=object)


def shear_add(d: int, field: NumericField | None = None) -> np.ndarray:
    """(1, a) -> (1, a + d)."""
    return _mat([[1, 0], [d, 1]], field)


def count_by(k: int, dim: int = 3, src: int = 0, dst: int = 1, field: NumericField | None = None) -> np.ndarray:
    """Identity plus ``k`` at (dst, src): each application adds ``k * v[src]`` to ``v[dst]``."""
    if src == dst:
        raise ValueError("count_by needs distinct source and target entries")
    if not (0 <= src < dim and 0 <= dst < dim):
        raise IndexError(f"entries must lie in 0..{dim - 1}")
    rows = np.eye(dim, dtype=int).tolist()
    rows[dst][src] = k
    return _mat(rows, field)


def subtract_pair(field: NumericField | None = None) -> np.ndarray:
    """(a, b) -> (a - b, b)."""
    return _mat([[1, -1], [0, 1]], field)


def scale_entry(c, field: NumericField | None = None) -> np.ndarray:
    """(a, b) -> (a, b * c)."""
    return _mat([[1, 0], [0, c]], field)


def rotation(theta, field: NumericField | None = None) -> np.ndarray:
    """Counter-clockwise rotation by ``theta`` radians; needs a float field."""
    field = field or NumericField.high_precision()
    t = field(theta)
    c, s = field.cos(t), field.sin(t)
    return np.array([[c, -s], [s, c]], dtype=object)


def gadget(matrix: np.ndarray, description: str) -> Gadget:
    return Gadget(matrix, description)
