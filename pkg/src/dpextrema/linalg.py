"""Symmetric-matrix helpers shared by the estimators.

Laplace noise can push a covariance or scaled gram matrix off the positive
semidefinite cone; the estimators repair it by clipping eigenvalues at a small
floor relative to the matrix scale, and flag the repair as degenerate when the
total eigenvalue shift exceeds a fraction of the trace.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

PSD_FLOOR_SCALE = 1e-8
REPAIR_BUDGET_FRACTION = 0.10
_ABSOLUTE_FLOOR = 1e-12


class RepairResult(NamedTuple):
    matrix: np.ndarray
    shift: float        # total eigenvalue mass added by clipping
    floor: float
    degenerate: bool    # shift exceeded the repair budget


def psd_floor(matrix: np.ndarray, floor_scale: float = PSD_FLOOR_SCALE) -> float:
    k = matrix.shape[0]
    tr = float(np.trace(matrix))
    return max(floor_scale * max(tr, 0.0) / k, _ABSOLUTE_FLOOR)


def psd_repair(
    matrix: np.ndarray,
    floor_scale: float = PSD_FLOOR_SCALE,
    budget_fraction: float = REPAIR_BUDGET_FRACTION,
) -> RepairResult:
    """Clip the eigenvalues of a symmetric matrix below at a relative floor.

    A no-op (the input is returned unchanged) when all eigenvalues already sit
    at or above the floor.
    """
    m = np.asarray(matrix, dtype=float)
    floor = psd_floor(m, floor_scale)
    eigvals, eigvecs = np.linalg.eigh(m)
    if eigvals[0] >= floor:
        return RepairResult(m, 0.0, floor, False)
    clipped = np.maximum(eigvals, floor)
    shift = float(np.sum(clipped - eigvals))
    repaired = (eigvecs * clipped) @ eigvecs.T
    repaired = 0.5 * (repaired + repaired.T)
    budget = budget_fraction * max(float(np.trace(m)), 0.0)
    return RepairResult(repaired, shift, floor, shift > budget)


def sym_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root; tiny negative eigenvalues are treated as 0."""
    m = np.asarray(matrix, dtype=float)
    eigvals, eigvecs = np.linalg.eigh(m)
    root = np.sqrt(np.maximum(eigvals, 0.0))
    return (eigvecs * root) @ eigvecs.T
