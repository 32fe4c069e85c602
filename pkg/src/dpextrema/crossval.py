"""Data-adaptive choice of the correction strength r by cross-validation.

The data are split into v near-equal folds by a seeded shuffle.  For each
fold, the remaining folds produce a privatized bias-reduced estimate of the
maximum at every candidate r, and the held-out fold produces an independent
privatized estimate of each coordinate with its standard error.  A candidate
is scored by how closely its bias-reduced maximum tracks the held-out
coordinates after removing the variance the held-out estimate contributes;
the r minimizing the aggregated score wins, with ties broken toward the
larger (weaker) correction.

Budget accounting for this procedure is genuinely ambiguous: the held-out
folds are disjoint (parallel composition applies) but the training sets
overlap across rounds.  Both readings are therefore reported side by side:
``budget_parallel_view`` equals the budget of a single estimation run, and
``budget_sequential_view`` counts every fold estimation at full price.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .extrema import DEFAULT_B_INNER, bias_reduced_from_draws
from .models import (
    GaussianData,
    RegressionData,
    gaussian_private_mle,
    regression_private_mle,
)

DEFAULT_GRID = (1.0 / 30.0, 1.0 / 15.0, 1.0 / 10.0, 1.0 / 5.0)
DEFAULT_FOLDS = 5

__all__ = ["CVConfig", "CVResult", "DEFAULT_FOLDS", "DEFAULT_GRID", "cv_choose_r"]


@dataclass(frozen=True)
class CVConfig:
    folds: int = DEFAULT_FOLDS
    grid: tuple[float, ...] = DEFAULT_GRID
    b_inner: int = DEFAULT_B_INNER
    budget_handling: str = "parallel"  # or "worst_case_sequential"

    def __post_init__(self):
        if self.folds < 2:
            raise ParameterError("cross-validation needs at least 2 folds")
        grid = tuple(float(r) for r in self.grid)
        if not grid:
            raise ParameterError("candidate grid is empty")
        for r in grid:
            if math.isnan(r) or not (0.0 < r < 0.5):
                raise ParameterError("grid values must lie strictly inside (0, 0.5)")
        # nondecreasing, not strictly increasing: duplicated values are legal
        # and exercise the deterministic tie-break
        if any(a > b for a, b in zip(grid, grid[1:])):
            raise ParameterError("candidate grid must be sorted ascending")
        if self.b_inner < 50:
            raise ParameterError("b_inner must be >= 50")
        if self.budget_handling not in ("parallel", "worst_case_sequential"):
            raise ParameterError(f"unknown budget handling {self.budget_handling!r}")
        object.__setattr__(self, "grid", grid)


@dataclass(eq=False)
class CVResult:
    chosen_r: float
    grid: tuple[float, ...]
    criterion: np.ndarray            # aggregated score per grid value
    h: np.ndarray                    # (grid, fold, coordinate) scores
    fold_sizes: tuple[int, ...]
    budget_parallel_view: float      # one estimation run's total
    budget_sequential_view: float    # every fold estimation at full price
    budget_handling: str
    per_fold: list[dict] = field(default_factory=list)

    @property
    def budget_total(self) -> float:
        if self.budget_handling == "parallel":
            return self.budget_parallel_view
        return self.budget_sequential_view


def _subset(data, idx: np.ndarray):
    # imported lazily to keep the partial-privacy module optional here
    from .partial import PartitionedGaussianData

    if isinstance(data, GaussianData):
        return GaussianData(data.x[idx], data.bounds)
    if isinstance(data, PartitionedGaussianData):
        x2 = None if data.x2 is None else data.x2[idx]
        return PartitionedGaussianData(data.x1[idx], x2, data.bounds)
    if isinstance(data, RegressionData):
        return RegressionData(data.X[idx], data.y[idx], data.x_bounds, data.y_bounds)
    raise ParameterError(
        f"cross-validation does not support {type(data).__name__}; "
        "fold subsets must remain valid inputs for the estimator"
    )


def _estimate(data, budget, rng, tag: str):
    from .partial import PartitionedGaussianData, partial_gaussian_private_mle

    if isinstance(data, PartitionedGaussianData):
        return partial_gaussian_private_mle(data, budget, rng, statistic_prefix=tag)
    if isinstance(data, GaussianData):
        return gaussian_private_mle(data, budget, rng, statistic_prefix=tag)
    return regression_private_mle(data, budget, rng, statistic_prefix=tag)


def _min_fold_size(data) -> int:
    if isinstance(data, RegressionData):
        return data.k + 1
    return 2


def cv_choose_r(
    data,
    budget,
    rng: np.random.Generator,
    config: CVConfig | None = None,
) -> CVResult:
    """Pick the correction strength from ``config.grid`` by cross-validation.

    Deterministic given the data, budget, config, and generator state.  Every
    fold estimation uses the same per-statistic budget split as a full run.
    """
    config = config or CVConfig()
    n = data.n
    v = config.folds
    if n < 2 * v:
        raise ParameterError(f"need n >= {2 * v} observations for {v} folds")

    perm = rng.permutation(n)
    folds = np.array_split(perm, v)
    min_size = _min_fold_size(data)
    if min(f.size for f in folds) < min_size:
        raise ParameterError("a fold is too small for the model estimator")

    m = len(config.grid)
    h = np.empty((m, v, 0))
    per_fold: list[dict] = []
    estimation_totals: list[float] = []

    for j, ref_idx in enumerate(folds):
        train_idx = np.concatenate([f for i, f in enumerate(folds) if i != j])
        train = _subset(data, np.sort(train_idx))
        ref = _subset(data, np.sort(ref_idx))

        est_train = _estimate(train, budget, rng, tag=f"cv:fold{j}:train")
        # draws are shared across the grid: the correction only shifts them
        draws, _ = est_train.bootstrap_draws(config.b_inner, rng)
        est_ref = _estimate(ref, budget, rng, tag=f"cv:fold{j}:ref")
        ref_sd = np.sqrt(est_ref.coordinate_variances(private=True))

        k1 = est_ref.beta_priv.size
        if h.shape[2] == 0:
            h = np.empty((m, v, k1))
        reduced = np.array(
            [bias_reduced_from_draws(est_train.beta_priv, draws, r, train.n) for r in config.grid]
        )
        h[:, j, :] = (reduced[:, None] - est_ref.beta_priv[None, :]) ** 2 - ref_sd[None, :] ** 2

        estimation_totals.append(est_train.ledger.total_sequential())
        estimation_totals.append(est_ref.ledger.total_sequential())
        per_fold.append(
            {
                "fold": j,
                "train_n": train.n,
                "ref_n": ref.n,
                "train_beta": est_train.beta_priv.tolist(),
                "ref_beta": est_ref.beta_priv.tolist(),
                "reduced_max": reduced.tolist(),
            }
        )

    criterion = h.sum(axis=1).min(axis=1) / v
    best = 0
    for l in range(1, m):
        if criterion[l] <= criterion[best]:  # ties go to the larger r
            best = l

    return CVResult(
        chosen_r=config.grid[best],
        grid=config.grid,
        criterion=criterion,
        h=h,
        fold_sizes=tuple(f.size for f in folds),
        budget_parallel_view=max(estimation_totals) if estimation_totals else 0.0,
        budget_sequential_view=float(sum(estimation_totals)),
        budget_handling=config.budget_handling,
        per_fold=per_fold,
    )
