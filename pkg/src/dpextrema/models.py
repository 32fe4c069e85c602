"""Privatized point estimation and parametric bootstrap draws.

Two concrete model families are implemented:

* multivariate Gaussian observations, where the coordinates of interest are
  the component means, and
* linear regression, where the coordinates of interest are the coefficients.

Both estimators add Laplace noise to the sufficient statistics (sums, gram
matrices, cross products) and post-process the noisy statistics into point
estimates.  Their bootstrap draws replay the estimation recipe on data
simulated from the fitted model, adding fresh simulation-only Laplace noise of
the same scale so the extra randomness of privatization is reflected in the
bootstrap distribution.

The Gaussian bootstrap never materializes the n simulated observations: the
resample mean of n i.i.d. N(mu, Sigma) draws has the exact law N(mu, Sigma/n),
so the mean is drawn directly from that law.  This is an identity, not an
approximation, and keeps Monte Carlo studies tractable.  The regression
bootstrap is already formulated in terms of the released statistics and never
touches the design matrix again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np

from .errors import NumericError, ParameterError
from .linalg import RepairResult, psd_floor, psd_repair, sym_sqrt
from .privacy import (
    Bounds,
    LaplaceSpec,
    PrivacyLedger,
    laplace_symmetric_sample,
    sensitivity_cross_bounded,
    sensitivity_gram_bounded,
    sensitivity_sum_bounded,
    split_budget,
)

SIGMA2_FLOOR = 1e-8

__all__ = [
    "GaussianData",
    "PrivatizedGaussianEstimate",
    "RegressionData",
    "PrivatizedRegressionEstimate",
    "SIGMA2_FLOOR",
    "gaussian_private_mle",
    "gaussian_bootstrap_draw",
    "regression_private_mle",
    "regression_bootstrap_draw",
]


# ---------------------------------------------------------------------------
# multivariate Gaussian
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianData:
    """n observations of a k-dimensional vector, with declared coordinate bounds."""

    x: np.ndarray
    bounds: Bounds

    def __post_init__(self):
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if x.ndim != 2 or x.shape[0] < 2:
            raise ParameterError("Gaussian data needs an (n, k) matrix with n >= 2")
        if x.shape[1] != self.bounds.k:
            raise ParameterError("bounds dimension does not match the data")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def k(self) -> int:
        return self.x.shape[1]


@dataclass(eq=False)
class PrivatizedGaussianEstimate:
    """Noisy mean/covariance release plus everything needed to bootstrap it."""

    mu_priv: np.ndarray
    sigma_priv: np.ndarray
    n: int
    ledger: PrivacyLedger
    sum_noise: LaplaceSpec
    gram_noise: LaplaceSpec
    noisy_sum: np.ndarray   # released coordinate sum, noise included
    noisy_gram: np.ndarray  # released second-moment matrix, noise included
    repair: RepairResult
    _sigma_sqrt: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.mu_priv.size

    @property
    def beta_priv(self) -> np.ndarray:
        """Coordinates of interest (the component means)."""
        return self.mu_priv

    @property
    def degenerate(self) -> bool:
        return self.repair.degenerate

    def sigma_sqrt(self) -> np.ndarray:
        if self._sigma_sqrt is None:
            self._sigma_sqrt = sym_sqrt(self.sigma_priv)
        return self._sigma_sqrt

    def bootstrap_draws(
        self,
        size: int,
        rng: np.random.Generator,
        n: int | None = None,
        privacy_noise: bool = True,
    ) -> tuple[np.ndarray, int]:
        """Draw ``size`` bootstrap replicas of the privatized mean.

        Each replica is the mean of n simulated observations from
        N(mu_priv, sigma_priv) plus a fresh simulation-only Laplace noise of
        the estimation scale, divided by n.  ``privacy_noise=False`` skips the
        Laplace term (the ablation that ignores privatization randomness).
        Returns (draws, failed_count); Gaussian draws cannot fail.
        """
        m = self.n if n is None else int(n)
        if m < 1:
            raise ParameterError("bootstrap sample size must be >= 1")
        z = rng.standard_normal((size, self.k))
        draws = self.mu_priv + (z @ self.sigma_sqrt().T) / math.sqrt(m)
        if privacy_noise and not self.sum_noise.is_zero:
            draws = draws + self.sum_noise.sample(rng, size) / m
        return draws, 0

    def bootstrap_draw(
        self,
        rng: np.random.Generator,
        n: int | None = None,
        privacy_noise: bool = True,
    ) -> np.ndarray:
        draws, _ = self.bootstrap_draws(1, rng, n=n, privacy_noise=privacy_noise)
        return draws[0]

    def coordinate_variances(self, private: bool = True) -> np.ndarray:
        """Plug-in variance of each released mean coordinate.

        The private variant adds the Laplace noise variance 2 b^2 / n^2 of the
        privatized sum; both variants use only released quantities.
        """
        # reconstruction rounding in the PSD repair can leave a diagonal entry
        # a few ulps below zero in extreme-noise regimes
        v = np.maximum(np.diag(self.sigma_priv), 0.0) / self.n
        if private and not self.sum_noise.is_zero:
            v = v + 2.0 * self.sum_noise.scale**2 / self.n**2
        return v

    def to_dict(self) -> dict:
        return {
            "model": "gaussian",
            "n": self.n,
            "k": self.k,
            "mu_priv": self.mu_priv.tolist(),
            "sigma_priv": self.sigma_priv.tolist(),
            "noisy_sum": self.noisy_sum.tolist(),
            "noisy_gram": self.noisy_gram.tolist(),
            "noise_scales": {"sum": self.sum_noise.scale, "gram": self.gram_noise.scale},
            "repair": {"shift": self.repair.shift, "degenerate": self.repair.degenerate},
            "ledger": self.ledger.to_dict(),
        }


def _gaussian_from_noisy_stats(noisy_sum: np.ndarray, noisy_gram: np.ndarray, n: int):
    """Mean and (unrepaired) covariance implied by the noisy sufficient statistics."""
    mu = noisy_sum / n
    sigma = noisy_gram / (n - 1) - np.outer(noisy_sum, noisy_sum) / (n * (n - 1))
    return mu, 0.5 * (sigma + sigma.T)


def gaussian_private_mle(
    data: GaussianData,
    budget,
    rng: np.random.Generator,
    statistic_prefix: str = "gaussian",
) -> PrivatizedGaussianEstimate:
    """Privatized mean and covariance from noisy sums and second moments.

    ``budget`` is either a total epsilon (split equally between the two
    sufficient statistics) or a pair of per-statistic epsilons.  The noisy
    covariance is repaired onto the PSD cone; a repair that shifts eigenvalue
    mass beyond the budget marks the estimate as degenerate but does not fail.
    """
    eps_sum, eps_gram = split_budget(budget, 2)
    x = data.bounds.clamp(data.x)
    n, k = x.shape

    sum_spec = LaplaceSpec.from_budget(
        sensitivity_sum_bounded(data.bounds.lower, data.bounds.upper).delta, eps_sum, k
    )
    gram_scale = LaplaceSpec.from_budget(
        sensitivity_gram_bounded(data.bounds.lower, data.bounds.upper).delta,
        eps_gram,
        k * (k + 1) // 2,
    )

    noisy_sum = x.sum(axis=0) + sum_spec.sample(rng)
    noisy_gram = x.T @ x + laplace_symmetric_sample(gram_scale.scale, k, rng)
    mu, sigma = _gaussian_from_noisy_stats(noisy_sum, noisy_gram, n)
    repair = psd_repair(sigma)

    ledger = (
        PrivacyLedger()
        .charge(f"{statistic_prefix}:sum", eps_sum)
        .charge(f"{statistic_prefix}:gram", eps_gram)
    )
    return PrivatizedGaussianEstimate(
        mu_priv=mu,
        sigma_priv=repair.matrix,
        n=n,
        ledger=ledger,
        sum_noise=sum_spec,
        gram_noise=gram_scale,
        noisy_sum=noisy_sum,
        noisy_gram=noisy_gram,
        repair=repair,
    )


def gaussian_bootstrap_draw(
    est: PrivatizedGaussianEstimate,
    n: int,
    rng: np.random.Generator,
    privacy_noise: bool = True,
) -> np.ndarray:
    """One bootstrap replica of the privatized mean (see the estimate method)."""
    return est.bootstrap_draw(rng, n=n, privacy_noise=privacy_noise)


# ---------------------------------------------------------------------------
# linear regression
# ---------------------------------------------------------------------------


def _solve_batch(systems: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a stack of k x k systems against a stack of k-vectors."""
    return np.linalg.solve(systems, rhs[:, :, None])[:, :, 0]


@dataclass(frozen=True, eq=False)
class RegressionData:
    """Design matrix and response with declared bounds for rows of X and for y."""

    X: np.ndarray
    y: np.ndarray
    x_bounds: Bounds
    y_bounds: Bounds

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        y = np.asarray(self.y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.size:
            raise ParameterError("X must be (n, k) with one response per row")
        if X.shape[0] <= X.shape[1]:
            raise ParameterError("regression needs n > k")
        if X.shape[1] != self.x_bounds.k:
            raise ParameterError("x_bounds dimension does not match the design")
        if self.y_bounds.k != 1:
            raise ParameterError("y_bounds must be a scalar range")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]


@dataclass(eq=False)
class PrivatizedRegressionEstimate:
    """Noisy coefficient release with the scaled gram matrix used to bootstrap it."""

    beta_priv: np.ndarray
    sigma2_priv: float
    S_priv: np.ndarray          # repaired (X^T X + noise) / n
    n: int
    ledger: PrivacyLedger
    gram_noise: LaplaceSpec     # noise on X^T X (per free entry)
    xty_noise: LaplaceSpec      # noise on X^T y
    rss_noise: LaplaceSpec      # noise on the residual mean square
    noisy_gram: np.ndarray
    noisy_xty: np.ndarray
    repair: RepairResult
    _cov_sqrt: np.ndarray | None = field(default=None, repr=False, compare=False)
    _s_inv: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def k(self) -> int:
        return self.beta_priv.size

    @property
    def degenerate(self) -> bool:
        return self.repair.degenerate

    def _score_cov_sqrt(self) -> np.ndarray:
        if self._cov_sqrt is None:
            self._cov_sqrt = sym_sqrt(self.sigma2_priv * self.S_priv)
        return self._cov_sqrt

    def _s_priv_inv(self) -> np.ndarray:
        if self._s_inv is None:
            self._s_inv = np.linalg.inv(self.S_priv)
        return self._s_inv

    def bootstrap_draws(
        self,
        size: int,
        rng: np.random.Generator,
        n: int | None = None,
        privacy_noise: bool = True,
    ) -> tuple[np.ndarray, int]:
        """Draw bootstrap replicas of the privatized coefficients.

        Each replica solves (S + W1/n) b = S beta + (C + W2/sqrt(n)) / sqrt(n)
        with C ~ N(0, sigma2 S) and fresh simulation-only noise W1, W2 of the
        estimation scales.  A draw whose noisy matrix is numerically singular
        is retried once with fresh W1; a second failure drops the draw and is
        counted in the returned failure total.
        """
        m = self.n if n is None else int(n)
        if m < 1:
            raise ParameterError("bootstrap sample size must be >= 1")
        k = self.k
        floor = psd_floor(self.S_priv)

        c = rng.standard_normal((size, k)) @ self._score_cov_sqrt().T
        if privacy_noise and not self.xty_noise.is_zero:
            c = c + self.xty_noise.sample(rng, size) / math.sqrt(m)
        rhs = (self.S_priv @ self.beta_priv)[None, :] + c / math.sqrt(m)

        systems = np.broadcast_to(self.S_priv, (size, k, k)).copy()
        if privacy_noise and not self.gram_noise.is_zero:
            systems += self._symmetric_noise_batch(size, rng) / m

        draws = np.empty((size, k))
        bad = self._near_singular(systems, floor)
        good = ~bad
        if good.any():
            draws[good] = _solve_batch(systems[good], rhs[good])

        failed = 0
        if bad.any():
            retry_idx = np.flatnonzero(bad)
            retries = np.broadcast_to(self.S_priv, (retry_idx.size, k, k)).copy()
            if privacy_noise and not self.gram_noise.is_zero:
                retries += self._symmetric_noise_batch(retry_idx.size, rng) / m
            still_bad = self._near_singular(retries, floor)
            ok = ~still_bad
            if ok.any():
                draws[retry_idx[ok]] = _solve_batch(retries[ok], rhs[retry_idx[ok]])
            failed = int(still_bad.sum())
            if failed:
                keep = np.ones(size, dtype=bool)
                keep[retry_idx[still_bad]] = False
                draws = draws[keep]
        return draws, failed

    def _symmetric_noise_batch(self, size: int, rng: np.random.Generator) -> np.ndarray:
        k = self.k
        w = np.zeros((size, k, k))
        iu = np.triu_indices(k)
        w[:, iu[0], iu[1]] = rng.laplace(0.0, self.gram_noise.scale, size=(size, iu[0].size))
        il = np.tril_indices(k, -1)
        w[:, il[0], il[1]] = w[:, il[1], il[0]]
        return w

    @staticmethod
    def _near_singular(systems: np.ndarray, floor: float) -> np.ndarray:
        eigvals = np.linalg.eigvalsh(systems)
        return np.abs(eigvals).min(axis=1) < floor

    def bootstrap_draw(
        self,
        rng: np.random.Generator,
        n: int | None = None,
        privacy_noise: bool = True,
    ) -> np.ndarray:
        draws, failed = self.bootstrap_draws(1, rng, n=n, privacy_noise=privacy_noise)
        if failed:
            raise NumericError("bootstrap system singular after one retry")
        return draws[0]

    def coordinate_variances(self, private: bool = True) -> np.ndarray:
        """Plug-in variance of each released coefficient.

        sigma2 * S^{-1} / n for the sampling part; the private variant adds
        the propagated Laplace variance of the noisy cross product,
        S^{-1} (2 b^2 I) S^{-1} / n^2.
        """
        s_inv = self._s_priv_inv()
        v = self.sigma2_priv * np.diag(s_inv) / self.n
        if private and not self.xty_noise.is_zero:
            v = v + 2.0 * self.xty_noise.scale**2 * np.diag(s_inv @ s_inv) / self.n**2
        return v

    def to_dict(self) -> dict:
        return {
            "model": "regression",
            "n": self.n,
            "k": self.k,
            "beta_priv": self.beta_priv.tolist(),
            "sigma2_priv": self.sigma2_priv,
            "S_priv": self.S_priv.tolist(),
            "noisy_gram": self.noisy_gram.tolist(),
            "noisy_xty": self.noisy_xty.tolist(),
            "noise_scales": {
                "gram": self.gram_noise.scale,
                "xty": self.xty_noise.scale,
                "rss": self.rss_noise.scale,
            },
            "repair": {"shift": self.repair.shift, "degenerate": self.repair.degenerate},
            "ledger": self.ledger.to_dict(),
        }


def _noisy_gram_solve(
    Z: np.ndarray,
    y: np.ndarray,
    z_bounds: Bounds,
    y_bounds: Bounds,
    eps_gram: float,
    eps_xty: float,
    rng: np.random.Generator,
):
    """Shared core: noisy normal equations (Z^T Z + W1) beta = Z^T y + W2."""
    n, k = Z.shape
    gram_spec = LaplaceSpec.from_budget(
        sensitivity_gram_bounded(z_bounds.lower, z_bounds.upper).delta,
        eps_gram,
        k * (k + 1) // 2,
    )
    xty_spec = LaplaceSpec.from_budget(
        sensitivity_cross_bounded(
            z_bounds.lower, z_bounds.upper, y_bounds.lower, y_bounds.upper
        ).delta,
        eps_xty,
        k,
    )
    noisy_gram = Z.T @ Z + laplace_symmetric_sample(gram_spec.scale, k, rng)
    noisy_xty = Z.T @ y + xty_spec.sample(rng)
    repair = psd_repair(noisy_gram / n)
    if repair.degenerate:
        raise NumericError(
            "noisy gram matrix is irreparably singular; widen the budget or bounds"
        )
    s_priv = repair.matrix
    beta = np.linalg.solve(n * s_priv, noisy_xty)
    return beta, s_priv, gram_spec, xty_spec, noisy_gram, noisy_xty, repair


def _residual_noise_scale(
    rss_mean: float,
    beta: np.ndarray,
    z_bounds: Bounds,
    y_bounds: Bounds,
    eps_rss: float,
    dof: int,
    extra_fit_bound: float,
    rng: np.random.Generator,
) -> tuple[float, LaplaceSpec]:
    """Privatize the residual mean square.

    The per-record squared residual is bounded by the box ranges and the
    already-released coefficients (post-processing of a DP output may
    calibrate the next mechanism), so the sensitivity is
    (m_y + sum_j m_j |beta_j| + extra)^2 / dof.
    """
    m_res = float(
        y_bounds.magnitudes[0]
        + np.sum(z_bounds.magnitudes * np.abs(beta))
        + extra_fit_bound
    )
    rss_spec = LaplaceSpec.from_budget(m_res**2 / dof, eps_rss, 1)
    sigma2 = rss_mean + float(rss_spec.sample(rng)[0])
    return max(sigma2, SIGMA2_FLOOR), rss_spec


def regression_private_mle(
    data: RegressionData,
    budget,
    rng: np.random.Generator,
    statistic_prefix: str = "regression",
) -> PrivatizedRegressionEstimate:
    """Privatized OLS coefficients and residual variance.

    ``budget`` is a total epsilon split equally across the three released
    statistics (gram matrix, cross product, residual mean square) or an
    explicit triple.  Residuals are computed against the clamped data with the
    released coefficients, then noised; the variance is clipped below at a
    small positive floor so the bootstrap stays well defined.
    """
    eps_gram, eps_xty, eps_rss = split_budget(budget, 3)
    X = data.x_bounds.clamp(data.X)
    y = data.y_bounds.clamp(data.y)
    n, k = X.shape

    beta, s_priv, gram_spec, xty_spec, noisy_gram, noisy_xty, repair = _noisy_gram_solve(
        X, y, data.x_bounds, data.y_bounds, eps_gram, eps_xty, rng
    )
    resid = y - X @ beta
    dof = n - k
    sigma2, rss_spec = _residual_noise_scale(
        float(resid @ resid) / dof, beta, data.x_bounds, data.y_bounds, eps_rss, dof, 0.0, rng
    )

    ledger = (
        PrivacyLedger()
        .charge(f"{statistic_prefix}:gram", eps_gram)
        .charge(f"{statistic_prefix}:xty", eps_xty)
        .charge(f"{statistic_prefix}:rss", eps_rss)
    )
    return PrivatizedRegressionEstimate(
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
    )


def regression_bootstrap_draw(
    est: PrivatizedRegressionEstimate,
    n: int,
    rng: np.random.Generator,
    privacy_noise: bool = True,
) -> np.ndarray:
    """One bootstrap replica of the privatized coefficients (see the estimate method)."""
    return est.bootstrap_draw(rng, n=n, privacy_noise=privacy_noise)
