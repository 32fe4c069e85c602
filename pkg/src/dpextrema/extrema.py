"""Lower confidence limits for the maximum of the coordinates of interest.

The main entry point is :func:`ppb_lower_limit`, the privatized parametric
bootstrap with selection-bias correction:

1. take the released coordinate estimates and their maximum;
2. shift each bootstrap replica coordinate up by its correction term
   ``(1 - n^(r - 0.5)) * (max - estimate_j)``, which counteracts the upward
   selection bias of the plug-in maximum (winner's curse);
3. collect the centered, sqrt(n)-scaled maxima of the shifted replicas and
   read the lower limit off their upper quantile.

``r`` in (0, 0.5] tunes the correction: r = 0.5 disables it (the semi-naive
bootstrap) and the ``FULL_CORRECTION`` sentinel applies the full distance to
the maximum.  Smaller r corrects more aggressively, trading limit tightness
for coverage.  Normal-approximation and Bonferroni baselines are provided for
comparison, using only released quantities so they satisfy the same privacy
guarantee.

Minima are out of scope: negate the data (or coordinates) and the resulting
limit, which turns an upper extremum problem into this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from scipy.stats import norm

from .errors import DegeneracyError, ParameterError

#: Sentinel for full-strength correction, the r -> -inf limit of the shrinkage
#: factor 1 - n^(r - 0.5).  Using the IEEE value keeps the arithmetic exact.
FULL_CORRECTION = float("-inf")

DEFAULT_B = 1000
DEFAULT_B_INNER = 200
MAX_FAILED_FRACTION = 0.01

__all__ = [
    "BiasCorrection",
    "ConfidenceResult",
    "DEFAULT_B",
    "DEFAULT_B_INNER",
    "FULL_CORRECTION",
    "bias_correction",
    "bias_reduced_estimate",
    "bonferroni_lower_limit",
    "bootstrap_statistic",
    "correction_factor",
    "naive_lower_limit",
    "ppb_limit_from_draws",
    "ppb_lower_limit",
    "quantile",
]


class ExtremaEstimate(Protocol):
    """What the engine needs from a model estimate."""

    beta_priv: np.ndarray
    n: int

    def bootstrap_draws(
        self, size: int, rng: np.random.Generator, n: int | None = ..., privacy_noise: bool = ...
    ) -> tuple[np.ndarray, int]: ...

    def coordinate_variances(self, private: bool = ...) -> np.ndarray: ...


def correction_factor(r: float, n: int) -> float:
    """Shrinkage factor 1 - n^(r - 0.5) for r in (0, 0.5] or FULL_CORRECTION."""
    if n < 2:
        raise ParameterError("correction needs n >= 2")
    if r == FULL_CORRECTION:
        return 1.0
    if not (0.0 < r <= 0.5) or math.isnan(r):
        raise ParameterError("r must lie in (0, 0.5] or be FULL_CORRECTION")
    return 1.0 - float(n) ** (r - 0.5)


@dataclass(frozen=True, eq=False)
class BiasCorrection:
    """Per-coordinate upward shifts applied to bootstrap replicas.

    shifts[j] = factor * (max_i beta_i - beta_j), so the shift of the leading
    coordinate is exactly zero, shifts are nonnegative, and for fixed
    estimates they are componentwise nonincreasing in r.
    """

    shifts: np.ndarray
    r: float
    n: int


def bias_correction(beta_priv: np.ndarray, r: float, n: int) -> BiasCorrection:
    beta = np.asarray(beta_priv, dtype=float).ravel()
    if beta.size < 1:
        raise ParameterError("need at least one coordinate")
    factor = correction_factor(r, n)
    shifts = factor * (beta.max() - beta)
    return BiasCorrection(shifts=shifts, r=r, n=int(n))


def bootstrap_statistic(beta_star_priv, correction, beta_max_priv: float, n: int) -> float:
    """Centered, scaled maximum of one shifted bootstrap replica."""
    shifts = correction.shifts if isinstance(correction, BiasCorrection) else np.asarray(correction, float)
    star = np.asarray(beta_star_priv, dtype=float).ravel()
    if star.shape != shifts.shape:
        raise ParameterError("replica and correction dimensions differ")
    return math.sqrt(n) * float((star + shifts - beta_max_priv).max())


def _statistic_batch(draws: np.ndarray, shifts: np.ndarray, beta_max: float, n: int) -> np.ndarray:
    return math.sqrt(n) * ((draws + shifts) - beta_max).max(axis=1)


def quantile(values, p: float) -> float:
    """Order-statistic quantile: the ceil(p * (B + 1))-th smallest value.

    The index is clamped into [1, B].  Slightly conservative and exact under
    exchangeability of the values.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ParameterError("quantile of an empty sample")
    if math.isnan(p) or not (0.0 < p < 1.0):
        raise ParameterError("quantile level must lie in (0, 1)")
    idx = min(max(math.ceil(p * (v.size + 1)), 1), v.size)
    return float(np.sort(v)[idx - 1])


@dataclass(frozen=True)
class ConfidenceResult:
    """A one-sided lower confidence limit and how it was obtained.

    For bootstrap methods ``lower_limit + c_alpha / sqrt(n) == beta_max_priv``
    holds to machine precision; the baselines fill ``c_alpha`` so the same
    identity applies.
    """

    lower_limit: float
    level: float
    c_alpha: float
    B: int | None
    method: str
    r_used: float | None = None
    failed_draws: int = 0

    def to_dict(self) -> dict:
        return {
            "lower_limit": self.lower_limit,
            "level": self.level,
            "c_alpha": self.c_alpha,
            "B": self.B,
            "method": self.method,
            "r_used": self.r_used,
            "failed_draws": self.failed_draws,
        }


def _method_tag(r: float, privacy_noise: bool) -> str:
    if not privacy_noise:
        return "rppb"
    return "semi_naive" if r == 0.5 else "ppb"


def ppb_limit_from_draws(
    beta_priv: np.ndarray,
    draws: np.ndarray,
    r: float,
    n: int,
    alpha: float = 0.05,
    failed_draws: int = 0,
    method: str | None = None,
) -> ConfidenceResult:
    """Assemble the bootstrap lower limit from precomputed replica draws.

    Useful when several values of r are evaluated on one replica set: the
    correction only shifts the replicas, so the draws can be shared.
    """
    if math.isnan(alpha) or not (0.0 < alpha < 0.5):
        raise ParameterError("alpha must lie in (0, 0.5)")
    beta = np.asarray(beta_priv, dtype=float).ravel()
    beta_max = float(beta.max())
    correction = bias_correction(beta, r, n)
    b_total = draws.shape[0] + failed_draws
    if failed_draws > MAX_FAILED_FRACTION * b_total:
        raise DegeneracyError(
            f"{failed_draws} of {b_total} bootstrap draws failed; estimate too degenerate"
        )
    t_values = _statistic_batch(draws, correction.shifts, beta_max, n)
    c_alpha = quantile(t_values, 1.0 - alpha)
    return ConfidenceResult(
        lower_limit=beta_max - c_alpha / math.sqrt(n),
        level=1.0 - alpha,
        c_alpha=c_alpha,
        B=draws.shape[0],
        method=method or _method_tag(r, True),
        r_used=r,
        failed_draws=failed_draws,
    )


def ppb_lower_limit(
    estimate: ExtremaEstimate,
    r: float,
    rng: np.random.Generator,
    alpha: float = 0.05,
    B: int = DEFAULT_B,
    n: int | None = None,
    privacy_noise: bool = True,
) -> ConfidenceResult:
    """Privatized parametric bootstrap lower limit for the coordinate maximum.

    Runs ``B`` bootstrap draws of the estimate, applies the bias correction at
    strength ``r``, and returns the (1 - alpha) limit.  The bootstrap spends
    no additional privacy budget: replicas are simulated from the released
    estimate only.  ``privacy_noise=False`` reproduces the ablation that skips
    the simulated privatization noise (and undercovers).
    """
    if B < 100:
        raise ParameterError("B must be >= 100")
    if math.isnan(alpha) or not (0.0 < alpha < 0.5):
        raise ParameterError("alpha must lie in (0, 0.5)")
    m = estimate.n if n is None else int(n)
    draws, failed = estimate.bootstrap_draws(B, rng, n=m, privacy_noise=privacy_noise)
    return ppb_limit_from_draws(
        estimate.beta_priv,
        draws,
        r,
        m,
        alpha=alpha,
        failed_draws=failed,
        method=_method_tag(r, privacy_noise),
    )


def naive_lower_limit(
    estimate: ExtremaEstimate,
    alpha: float = 0.05,
    private: bool = True,
    n: int | None = None,
) -> ConfidenceResult:
    """Normal-approximation limit on the winning coordinate, ignoring selection.

    The standard error combines the plug-in variance of the selected
    coordinate with (under ``private``) the Laplace noise variance of its
    release, so the baseline is not handicapped by unaccounted noise.
    """
    if math.isnan(alpha) or not (0.0 < alpha < 0.5):
        raise ParameterError("alpha must lie in (0, 0.5)")
    m = estimate.n if n is None else int(n)
    beta = np.asarray(estimate.beta_priv, dtype=float).ravel()
    j = int(np.argmax(beta))
    se = math.sqrt(float(estimate.coordinate_variances(private=private)[j]))
    z = float(norm.ppf(1.0 - alpha))
    lower = float(beta[j]) - z * se
    return ConfidenceResult(
        lower_limit=lower,
        level=1.0 - alpha,
        c_alpha=z * se * math.sqrt(m),
        B=None,
        method="naive_private" if private else "naive_nonprivate",
    )


def bonferroni_lower_limit(
    estimate: ExtremaEstimate,
    alpha: float = 0.05,
    private: bool = True,
    n: int | None = None,
) -> ConfidenceResult:
    """Max of per-coordinate limits at level 1 - alpha/k (union bound)."""
    if math.isnan(alpha) or not (0.0 < alpha < 0.5):
        raise ParameterError("alpha must lie in (0, 0.5)")
    m = estimate.n if n is None else int(n)
    beta = np.asarray(estimate.beta_priv, dtype=float).ravel()
    k = beta.size
    se = np.sqrt(estimate.coordinate_variances(private=private))
    z = float(norm.ppf(1.0 - alpha / k))
    lower = float((beta - z * se).max())
    return ConfidenceResult(
        lower_limit=lower,
        level=1.0 - alpha,
        c_alpha=(float(beta.max()) - lower) * math.sqrt(m),
        B=None,
        method="bonferroni_private" if private else "bonferroni_nonprivate",
    )


def bias_reduced_from_draws(beta_priv: np.ndarray, draws: np.ndarray, r: float, n: int) -> float:
    """Bias-reduced maximum from precomputed replica draws."""
    beta = np.asarray(beta_priv, dtype=float).ravel()
    beta_max = float(beta.max())
    correction = bias_correction(beta, r, n)
    replica_max = (draws + correction.shifts).max(axis=1)
    return beta_max - (float(replica_max.mean()) - beta_max)


def bias_reduced_estimate(
    estimate: ExtremaEstimate,
    r: float,
    rng: np.random.Generator,
    B_inner: int = DEFAULT_B_INNER,
    n: int | None = None,
) -> float:
    """Estimate of the maximum with the bootstrap selection bias subtracted.

    Averages the corrected replica maxima over ``B_inner`` draws and removes
    the estimated bias from the plug-in maximum.
    """
    if B_inner < 50:
        raise ParameterError("B_inner must be >= 50")
    m = estimate.n if n is None else int(n)
    draws, failed = estimate.bootstrap_draws(B_inner, rng, n=m, privacy_noise=True)
    if failed > MAX_FAILED_FRACTION * B_inner:
        raise DegeneracyError(f"{failed} of {B_inner} bootstrap draws failed")
    return bias_reduced_from_draws(estimate.beta_priv, draws, r, m)
