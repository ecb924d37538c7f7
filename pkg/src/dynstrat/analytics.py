"""Closed-form moment results for product-of-Gaussians strategies.

Everything here is driven by a single number: the correlation rho
between the signal X and the next-period return R.  The one-period
strategy S = X * R has

    mu1 = sX sR rho
    mu2 = sX^2 sR^2 (1 + rho^2)
    mu3 = sX^3 sR^3 * 2 rho (3 + rho^2)
    mu4 = sX^4 sR^4 * 3 (3 + 14 rho^2 + 3 rho^4)

giving SR = rho / sqrt(1 + rho^2), bounded by sqrt(2)/2, skewness
bounded by 2 sqrt(2), and kurtosis between 9 and 15.

Kurtosis is reported in the Pearson convention (mu4 / mu2^2, Gaussian
= 3) everywhere; the quadratic-form helper also exposes the raw
excess-style value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateSignalError, SampleSizeError, ValidationError
from .process import ReturnProcess
from .signals import (
    ConvolutionFilter,
    cross_correlation,
    signal_acf,
    signal_return_correlation,
)


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise ValidationError(f"correlation must be in [-1, 1], got {rho}")
    return rho


@dataclass(frozen=True)
class JointGaussianSpec:
    """Sufficient statistics for one-period strategy analytics."""

    sigma_R: float
    sigma_X: float
    rho: float
    mu_R: float = 0.0
    mu_X: float = 0.0

    def __post_init__(self):
        if self.sigma_R <= 0 or self.sigma_X <= 0:
            raise ValidationError("sigmas must be positive")
        _check_rho(self.rho)

    @property
    def sr_R(self) -> float:
        return self.mu_R / self.sigma_R

    @property
    def sr_X(self) -> float:
        return self.mu_X / self.sigma_X


@dataclass(frozen=True)
class StrategyStats:
    """Central moments and dimensionless statistics of S = X * R."""

    mu1: float
    mu2: float
    mu3: float
    mu4: float
    sharpe: float
    skewness: float
    kurtosis: float

    def to_json(self) -> str:
        return json.dumps(
            {"mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3, "mu4": self.mu4,
             "sharpe": self.sharpe, "skewness": self.skewness,
             "kurtosis": self.kurtosis, "kurtosis_convention": "pearson"}
        )


class DimensionlessStats(NamedTuple):
    sharpe: float
    skewness: float
    kurtosis: float


def dimensionless_stats(rho: float) -> DimensionlessStats:
    """Sharpe, skewness and (Pearson) kurtosis as functions of rho alone."""
    rho = _check_rho(rho)
    d = 1.0 + rho * rho
    return DimensionlessStats(
        sharpe=rho / math.sqrt(d),
        skewness=2.0 * rho * (3.0 + rho * rho) / d ** 1.5,
        kurtosis=3.0 * (3.0 + 14.0 * rho ** 2 + 3.0 * rho ** 4) / d ** 2,
    )


def product_moments(spec: JointGaussianSpec) -> StrategyStats:
    """Central moments of S = X * R for the zero-mean joint spec."""
    if spec.mu_R != 0.0 or spec.mu_X != 0.0:
        raise ValidationError(
            "product_moments requires zero means; use nonzero_mean_stats"
        )
    rho, s = spec.rho, spec.sigma_X * spec.sigma_R
    stats = dimensionless_stats(rho)
    return StrategyStats(
        mu1=s * rho,
        mu2=s ** 2 * (1.0 + rho ** 2),
        mu3=s ** 3 * 2.0 * rho * (3.0 + rho ** 2),
        mu4=s ** 4 * 3.0 * (3.0 + 14.0 * rho ** 2 + 3.0 * rho ** 4),
        sharpe=stats.sharpe,
        skewness=stats.skewness,
        kurtosis=stats.kurtosis,
    )


def annualize_sharpe(sr: float, periods_per_year: float) -> float:
    return sr * math.sqrt(periods_per_year)


def nonzero_mean_stats(sr_R: float, sr_X: float, rho: float) -> tuple[float, float]:
    """Sharpe and skewness of X * R when both factors have nonzero means.

    sr_R = mu_R / sigma_R and sr_X = mu_X / sigma_X are the per-factor
    Sharpe ratios; the zero-mean case reduces to dimensionless_stats.
    """
    rho = _check_rho(rho)
    denom = sr_R ** 2 + sr_X ** 2 + 2.0 * rho * sr_R * sr_X + rho ** 2 + 1.0
    sharpe = (sr_R * sr_X + rho) / denom ** 0.5
    third = 2.0 * (rho * (rho ** 2 + 3.0 + 3.0 * sr_R ** 2 + 3.0 * sr_X ** 2)
                   + 3.0 * sr_R * sr_X * (rho ** 2 + 1.0))
    return sharpe, third / denom ** 1.5


class MultiAssetStats(NamedTuple):
    mean: float
    variance: float
    third_central: float
    sharpe: float
    skewness: float


def multi_asset_stats(n: int, rho: float) -> MultiAssetStats:
    """Moments of the sum of N independent unit-scale strategy pairs."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rho = _check_rho(rho)
    d = rho ** 2 + 1.0
    return MultiAssetStats(
        mean=n * rho,
        variance=n * d,
        third_central=2.0 * n * rho * (rho ** 2 + 3.0),
        sharpe=math.sqrt(n) * rho / math.sqrt(d),
        skewness=2.0 * rho * (rho ** 2 + 3.0) / (math.sqrt(n) * d ** 1.5),
    )


def mgf_moments_oracle(n: int, rho: float, order: int) -> float:
    """Non-central moment of sum_i X_i R_i from its moment generating
    function M_N(t) = (1 - 2 t rho - t^2 (1 - rho^2))^(-N/2) (unit
    scales), via the exact Taylor expansion at t = 0.

    With u(t) = 1 - 2 rho t - (1 - rho^2) t^2, the binomial series
    u^(-N/2) = sum_j binom(-N/2, j) (-(2 rho t + (1-rho^2) t^2))^j is a
    polynomial truncation exact to any finite order.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if order not in (1, 2, 3, 4):
        raise ValidationError(f"order must be in 1..4, got {order}")
    rho = _check_rho(rho)
    a, b = 2.0 * rho, 1.0 - rho ** 2
    # Taylor coefficients of M(t) up to t^order
    coeffs = np.zeros(order + 1)
    binom = 1.0  # binom(-N/2, j)
    for j in range(order + 1):
        # (a t + b t^2)^j contributes to powers j..2j
        poly = np.zeros(order + 1)
        if j == 0:
            poly[0] = 1.0
        else:
            for m in range(j + 1):  # choose m factors of b t^2
                p = j + m
                if p <= order:
                    poly[p] += math.comb(j, m) * a ** (j - m) * b ** m
        coeffs += binom * (-1) ** j * poly
        binom *= (-n / 2.0 - j) / (j + 1.0)
    return float(coeffs[order] * math.factorial(order))


class QuadraticFormMoments(NamedTuple):
    mean: float
    variance: float
    skewness: float
    kurtosis: float        # Pearson convention
    kurtosis_excess: float  # raw trace-formula value


def quadratic_form_moments(a: np.ndarray, v: np.ndarray) -> QuadraticFormMoments:
    """Moments of the Gaussian quadratic form R'AR, R ~ N(0, V).

    mean = tr(AV), var = 2 tr((AV)^2),
    skew = 2 sqrt(2) tr((AV)^3) / tr((AV)^2)^{3/2},
    excess kurtosis = 12 tr((AV)^4) / tr((AV)^2)^2.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    v = np.atleast_2d(np.asarray(v, dtype=float))
    if a.shape != v.shape or a.shape[0] != a.shape[1]:
        raise ValidationError(f"dimension mismatch: A {a.shape}, V {v.shape}")
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValidationError("A must be symmetric")
    try:
        np.linalg.cholesky(v)
    except np.linalg.LinAlgError:
        raise ValidationError("V must be positive definite") from None
    av = a @ v
    av2 = av @ av
    t1, t2 = np.trace(av), np.trace(av2)
    t3, t4 = np.trace(av2 @ av), np.trace(av2 @ av2)
    excess = 12.0 * t4 / t2 ** 2
    return QuadraticFormMoments(
        mean=float(t1),
        variance=float(2.0 * t2),
        skewness=float(2.0 * math.sqrt(2.0) * t3 / t2 ** 1.5),
        kurtosis=float(3.0 + excess),
        kurtosis_excess=float(excess),
    )


def multiperiod_sharpe(filt: ConvolutionFilter, process: ReturnProcess,
                       horizon: int) -> float:
    """Sharpe ratio of the cumulative strategy sum_{t=1}^T X_t R_t.

    SR(T) = rho sqrt(T) / sqrt(1 + rho^2
            + 2 sum_{k=1}^{T-1} ((T-k)/T) (C(k) D(k) + rho(k) rho(-k)))
    with C the return ACF, D the signal ACF and rho(.) the
    signal/return cross-correlations.
    """
    horizon = int(horizon)
    if horizon < 1:
        raise ValidationError(f"horizon must be >= 1, got {horizon}")
    rho = signal_return_correlation(filt, process)
    acc = 0.0
    for k in range(1, horizon):
        ck = process.acf(k)
        dk = signal_acf(filt, process, k)
        rp = cross_correlation(filt, process, k)
        rm = cross_correlation(filt, process, -k)
        acc += (horizon - k) / horizon * (ck * dk + rp * rm)
    denom = 1.0 + rho ** 2 + 2.0 * acc
    if denom <= 0:
        raise DegenerateSignalError("non-positive multi-period variance")
    return rho * math.sqrt(horizon) / math.sqrt(denom)


def jb_floor(n: int, k: int = 0) -> float:
    """Theoretical Jarque-Bera lower bound 1.5 (n - k + 1), attained at
    rho = 0 where skewness is 0 and excess kurtosis is 6."""
    if n <= k:
        raise SampleSizeError(f"need n > k, got n={n}, k={k}")
    return 1.5 * (n - k + 1)


def jb_statistic(n: int, k: int, rho: float) -> float:
    """Theoretical JB value (n-k+1)/6 (skew^2 + (kurt-3)^2 / 4) of the
    strategy at correlation rho; attains jb_floor at rho = 0."""
    if n <= k:
        raise SampleSizeError(f"need n > k, got n={n}, k={k}")
    stats = dimensionless_stats(rho)
    return (n - k + 1) / 6.0 * (stats.skewness ** 2 + (stats.kurtosis - 3.0) ** 2 / 4.0)
