"""Distance corrections applied cell-wise to a matrix."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import DomainError
from .matrix import DistanceMatrix


def jukes_cantor_value(h):
    """Jukes-Cantor corrected distance for proportions ``h`` in ``[0, 3/4)``."""
    h = np.asarray(h, dtype=float)
    inner = 1 - 4 / 3 * h
    if (h < 0).any() or (inner <= 0).any():
        raise DomainError("Jukes-Cantor correction needs distances in [0, 0.75)")
    return -0.75 * np.log1p(-4 / 3 * h) + 0.0


def jukes_cantor(matrix: DistanceMatrix, locus_count: Optional[int] = None) -> DistanceMatrix:
    """Correct every distance of ``matrix``.

    Mismatch counts must be turned into proportions first: pass
    ``locus_count`` to divide by it. Without it the values are used as-is.
    """
    scale = 1.0 if locus_count is None else float(locus_count)

    def correct(values):
        return jukes_cantor_value(values / scale) + 0.0

    return matrix.map(correct, metric="jukescantor")


CORRECTIONS = {"jukescantor": jukes_cantor}
