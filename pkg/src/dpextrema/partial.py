"""Budget-saving estimation when only part of the parameters is released.

When the released coordinates depend on a subset of the sufficient statistics
only, noise (and budget) is spent on that subset alone; nuisance quantities
are still estimated where the fitted model needs them, but they stay inside
the estimate object and never appear on the released surface.

Two instantiations:

* a partitioned Gaussian, where only the means and covariance block of the
  coordinates of interest are privatized and the remaining block is internal;
* regression with nuisance covariates orthogonal to the design of interest
  (e.g. randomized-trial interaction terms vs. centered pre-treatment
  covariates), where only the statistics of the interest design are noised
  and the nuisance fit enters solely through the residual variance.

Downstream inference (bias correction, bootstrap scaling) uses the sample
size of the privatized block, which the returned estimates carry as ``n``.
"""

from __future__ import annotations

import numpy as np

from dataclasses import dataclass, field

from .errors import ParameterError
from .models import (
    GaussianData,
    PrivatizedGaussianEstimate,
    PrivatizedRegressionEstimate,
    _noisy_gram_solve,
    _residual_noise_scale,
    gaussian_private_mle,
)
from .privacy import Bounds, PrivacyLedger, split_budget

__all__ = [
    "NuisanceRegressionData",
    "PartialGaussianEstimate",
    "PartialRegressionEstimate",
    "PartitionedGaussianData",
    "partial_gaussian_private_mle",
    "partial_regression_bootstrap_draw",
    "partial_regression_private_mle",
]


@dataclass(frozen=True, eq=False)
class PartitionedGaussianData:
    """Joint observations split into an interest block and a nuisance block.

    Bounds are declared for the interest block only; the nuisance block is
    never privatized, so it needs no bounds.
    """

    x1: np.ndarray
    x2: np.ndarray | None
    bounds: Bounds

    def __post_init__(self):
        x1 = np.atleast_2d(np.asarray(self.x1, dtype=float))
        if x1.shape[0] < 2:
            raise ParameterError("need at least 2 observations")
        if x1.shape[1] != self.bounds.k:
            raise ParameterError("bounds dimension does not match the interest block")
        object.__setattr__(self, "x1", x1)
        if self.x2 is not None:
            x2 = np.atleast_2d(np.asarray(self.x2, dtype=float))
            if x2.shape[0] != x1.shape[0]:
                raise ParameterError("interest and nuisance blocks must align by row")
            object.__setattr__(self, "x2", x2)

    @property
    def n(self) -> int:
        return self.x1.shape[0]

    @property
    def k1(self) -> int:
        return self.x1.shape[1]


@dataclass(eq=False)
class PartialGaussianEstimate(PrivatizedGaussianEstimate):
    # internal-only nuisance estimates; excluded from repr and to_dict so the
    # released surface stays limited to the privatized block
    _nuisance: dict = field(default_factory=dict, repr=False, compare=False)


def partial_gaussian_private_mle(
    data: PartitionedGaussianData,
    budget,
    rng: np.random.Generator,
    statistic_prefix: str = "gaussian",
) -> PartialGaussianEstimate:
    """Privatize only the interest-block statistics of a partitioned Gaussian.

    The released estimate is exactly the interest-block release of the full
    estimator (the block mean depends on its own noisy sum alone).  Nuisance
    means and covariance blocks are computed without noise, with the noisy
    interest sum plugged in where that statistic appears, and kept internal.
    """
    base = gaussian_private_mle(
        GaussianData(data.x1, data.bounds), budget, rng, statistic_prefix=statistic_prefix
    )
    nuisance: dict = {}
    if data.x2 is not None:
        n = data.n
        x1 = data.bounds.clamp(data.x1)
        x2 = data.x2
        sum2 = x2.sum(axis=0)
        nuisance["mu2"] = sum2 / n
        nuisance["sigma12"] = (x1.T @ x2 - np.outer(base.noisy_sum, sum2) / n) / (n - 1)
        nuisance["sigma22"] = (x2.T @ x2 - np.outer(sum2, sum2) / n) / (n - 1)
    return PartialGaussianEstimate(
        mu_priv=base.mu_priv,
        sigma_priv=base.sigma_priv,
        n=base.n,
        ledger=base.ledger,
        sum_noise=base.sum_noise,
        gram_noise=base.gram_noise,
        noisy_sum=base.noisy_sum,
        noisy_gram=base.noisy_gram,
        repair=base.repair,
        _nuisance=nuisance,
    )


@dataclass(frozen=True, eq=False)
class NuisanceRegressionData:
    """Regression data with an interest design Z and nuisance covariates X.

    Requires Z^T X = 0 up to ``orthogonality_tolerance * n`` per entry, the
    structural condition (satisfied e.g. by randomized trials with centered
    covariates) under which the interest coefficients depend only on the
    Z-statistics.  ``nuisance_fit_bound`` is a declared bound on |x^T gamma|
    used when calibrating the residual-variance noise; it defaults to the
    response magnitude when nuisance covariates are present.
    """

    Z: np.ndarray
    X: np.ndarray | None
    y: np.ndarray
    z_bounds: Bounds
    y_bounds: Bounds
    nuisance_fit_bound: float | None = None
    orthogonality_tolerance: float = 1e-8

    def __post_init__(self):
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if Z.shape[0] != y.size:
            raise ParameterError("Z must have one row per response")
        if Z.shape[1] != self.z_bounds.k:
            raise ParameterError("z_bounds dimension does not match Z")
        if self.y_bounds.k != 1:
            raise ParameterError("y_bounds must be a scalar range")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "y", y)
        if self.X is not None and np.asarray(self.X).size > 0:
            X = np.atleast_2d(np.asarray(self.X, dtype=float))
            if X.shape[0] != Z.shape[0]:
                raise ParameterError("X must align with Z by row")
            object.__setattr__(self, "X", X)
            cross = np.abs(Z.T @ X).max()
            if cross > self.orthogonality_tolerance * Z.shape[0]:
                raise ParameterError(
                    "Z^T X is not numerically zero; the partial release is only valid "
                    "for orthogonal nuisance designs"
                )
        else:
            object.__setattr__(self, "X", None)
        if Z.shape[0] <= Z.shape[1] + self.k2:
            raise ParameterError("need n > k1 + k2")

    @property
    def n(self) -> int:
        return self.Z.shape[0]

    @property
    def k1(self) -> int:
        return self.Z.shape[1]

    @property
    def k2(self) -> int:
        return 0 if self.X is None else self.X.shape[1]


@dataclass(eq=False)
class PartialRegressionEstimate(PrivatizedRegressionEstimate):
    # non-private nuisance coefficients; internal only
    _gamma: np.ndarray | None = field(default=None, repr=False, compare=False)


def partial_regression_private_mle(
    data: NuisanceRegressionData,
    budget,
    rng: np.random.Generator,
    statistic_prefix: str = "regression",
) -> PartialRegressionEstimate:
    """Privatize only the interest-design statistics Z^T Z and Z^T y.

    The nuisance coefficients are fit without noise (they are needed for the
    residual variance) and never released.  With no nuisance covariates the
    output matches the plain regression estimator draw for draw.
    """
    eps_gram, eps_xty, eps_rss = split_budget(budget, 3)
    Z = data.z_bounds.clamp(data.Z)
    y = data.y_bounds.clamp(data.y)
    n = data.n

    beta, s_priv, gram_spec, xty_spec, noisy_gram, noisy_xty, repair = _noisy_gram_solve(
        Z, y, data.z_bounds, data.y_bounds, eps_gram, eps_xty, rng
    )

    if data.X is not None:
        gamma, *_ = np.linalg.lstsq(data.X, y - Z @ beta, rcond=None)
        resid = y - Z @ beta - data.X @ gamma
        fit_bound = (
            float(data.y_bounds.magnitudes[0])
            if data.nuisance_fit_bound is None
            else float(data.nuisance_fit_bound)
        )
    else:
        gamma = None
        resid = y - Z @ beta
        fit_bound = 0.0 if data.nuisance_fit_bound is None else float(data.nuisance_fit_bound)

    dof = n - data.k1 - data.k2
    sigma2, rss_spec = _residual_noise_scale(
        float(resid @ resid) / dof,
        beta,
        data.z_bounds,
        data.y_bounds,
        eps_rss,
        dof,
        fit_bound,
        rng,
    )

    ledger = (
        PrivacyLedger()
        .charge(f"{statistic_prefix}:gram", eps_gram)
        .charge(f"{statistic_prefix}:xty", eps_xty)
        .charge(f"{statistic_prefix}:rss", eps_rss)
    )
    return PartialRegressionEstimate(
        beta_priv=beta,
        sigma2_priv=sigma2,
        S_priv=s_priv,
        n=n,
        ledger=ledger,
        gram_noise=gram_spec,
        xty_noise=xty_spec,
        rss_noise=rss_spec,
        noisy_gram=noisy_gram,
        noisy_xty=noisy_xty,
        repair=repair,
        _gamma=gamma,
    )


def partial_regression_bootstrap_draw(
    est: PartialRegressionEstimate,
    n: int,
    rng: np.random.Generator,
    privacy_noise: bool = True,
) -> np.ndarray:
    """One bootstrap replica of the interest coefficients.

    Identical recipe to the plain regression bootstrap, with the scaled gram
    matrix built from Z^T Z; the nuisance fit is part of the fitted model and
    is not resampled.
    """
    return est.bootstrap_draw(rng, n=n, privacy_noise=privacy_noise)
