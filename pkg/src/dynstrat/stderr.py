"""Standard errors and sampling distributions for strategy statistics.

Four flavours of Sharpe-ratio standard error are provided:

* implied  -- delta method on the sampling error of the Pearson
  correlation, specific to product-of-Gaussians strategies;
* Lo       -- the generic large-sample sqrt((1 + SR^2/2) / T);
* Mertens  -- Lo refined with skewness/excess-kurtosis corrections
  (divided by T like Lo's; the correction terms enter the radicand);
* Gaussian baselines for skewness and kurtosis, for comparison only.

The exact sampling density of the Pearson correlation is also exposed
(numerical quadrature of the cosh integral) and is used to build
non-Gaussian confidence intervals for rho-hat and, by the monotone map
rho -> SR(rho), for the Sharpe ratio.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.stats import norm

from .errors import NumericError, SampleSizeError, ValidationError

_DEFAULT_LEVELS = (0.90, 0.95, 0.99)


def _check_rho_hat(rho_hat: float) -> float:
    rho_hat = float(rho_hat)
    if not -1.0 < rho_hat < 1.0:
        raise ValidationError(f"|rho_hat| must be < 1, got {rho_hat}")
    return rho_hat


def stderr_rho(rho_hat: float, t: int) -> float:
    """Sheppard/Pearson standard error of the sample correlation."""
    rho_hat = _check_rho_hat(rho_hat)
    if t < 3:
        raise SampleSizeError(f"need T >= 3, got {t}")
    return math.sqrt((1.0 - rho_hat ** 2) / (t - 2))


def stderr_sharpe_implied(rho_hat: float, t: int) -> float:
    """Delta-method stderr of SR = rho / sqrt(1 + rho^2)."""
    rho_hat = float(rho_hat)
    if abs(rho_hat) == 1.0 and t >= 3:
        return 0.0
    return stderr_rho(rho_hat, t) / (rho_hat ** 2 + 1.0) ** 1.5


def stderr_sharpe_implied_from_sr(sr_hat: float, t: int) -> float:
    """SR-parameterized form (1 - SR^2) sqrt((1 - 2 SR^2) / (T - 2)),
    valid for |SR| < sqrt(2)/2."""
    if t < 3:
        raise SampleSizeError(f"need T >= 3, got {t}")
    sr_hat = float(sr_hat)
    if abs(sr_hat) >= math.sqrt(2.0) / 2.0:
        raise ValidationError(f"|SR| must be < sqrt(2)/2, got {sr_hat}")
    return (1.0 - sr_hat ** 2) * math.sqrt((1.0 - 2.0 * sr_hat ** 2) / (t - 2))


def stderr_sharpe_lo(sr_hat: float, t: int) -> float:
    """Lo's large-sample stderr sqrt((1 + SR^2/2) / T)."""
    if t < 1:
        raise SampleSizeError(f"need T >= 1, got {t}")
    return math.sqrt((1.0 + 0.5 * sr_hat ** 2) / t)


def stderr_sharpe_mertens(sr_hat: float, gamma3: float, gamma4: float, t: int) -> float:
    """Mertens' refinement of Lo: skewness and excess-kurtosis
    corrections inside the radicand, still divided by T."""
    if t < 1:
        raise SampleSizeError(f"need T >= 1, got {t}")
    radicand = (1.0 + 0.5 * sr_hat ** 2 - gamma3 * sr_hat
                + (gamma4 - 3.0) / 4.0 * sr_hat ** 2)
    if radicand < 0:
        raise ValidationError(
            f"negative Mertens radicand {radicand} for "
            f"sr={sr_hat}, gamma3={gamma3}, gamma4={gamma4}"
        )
    return math.sqrt(radicand / t)


def stderr_skew_implied(rho_hat: float, t: int) -> float:
    """Delta-method stderr of the strategy skewness, as a magnitude."""
    rho_hat = float(rho_hat)
    if abs(rho_hat) == 1.0 and t >= 3:
        return 0.0
    d = -6.0 * (rho_hat ** 2 - 1.0) / (rho_hat ** 2 + 1.0) ** 2.5
    return abs(d) * stderr_rho(rho_hat, t)


def stderr_kurt_implied(rho_hat: float, t: int) -> float:
    """Delta-method stderr of the strategy kurtosis, as a magnitude."""
    rho_hat = float(rho_hat)
    if abs(rho_hat) == 1.0 and t >= 3:
        return 0.0
    d = -48.0 * rho_hat * (rho_hat ** 2 - 1.0) / (rho_hat ** 2 + 1.0) ** 3
    return abs(d) * stderr_rho(rho_hat, t)


def stderr_gaussian_baseline(t: int) -> tuple[float, float]:
    """(skew, kurt) standard errors under the normality assumption."""
    if t < 4:
        raise SampleSizeError(f"need T >= 4, got {t}")
    skew = math.sqrt(6.0 * (t - 2) / ((t + 1) * (t + 3)))
    kurt = math.sqrt(
        24.0 * t * (t - 2) * (t - 3) / ((t + 1) ** 2 * (t + 3) * (t + 5))
    )
    return skew, kurt


# -- exact sampling density of the Pearson correlation ------------------


def pearson_sample_density(rho: float, rho_hat: float, t: int) -> float:
    """Density of the sample correlation rho_hat for a bivariate
    Gaussian sample of size T with true correlation rho.

    f(rho_hat) = (T-2)(1-rho^2)^{(T-1)/2} (1-rho_hat^2)^{(T-4)/2} / pi
                 * integral_0^inf dw / (cosh w - rho rho_hat)^{T-1}
    """
    rho, rho_hat = _check_rho_hat(rho), _check_rho_hat(rho_hat)
    if t < 4:
        raise SampleSizeError(f"need T >= 4, got {t}")
    n = t - 1
    # the integrand decays like 2^{n} e^{-n w}; pick W so the tail < 1e-14
    w_max = (math.log(1e14) + math.log(2.0) * n) / n + 1.0
    val, err = integrate.quad(
        lambda w: (math.cosh(w) - rho * rho_hat) ** (-n),
        0.0, w_max, epsabs=1e-12, epsrel=1e-10, limit=200,
    )
    if not math.isfinite(val) or err > max(1e-8, 1e-6 * abs(val)):
        raise NumericError(
            f"correlation-density quadrature failed: value={val}, err={err}"
        )
    pref = ((t - 2) * (1.0 - rho ** 2) ** ((t - 1) / 2.0)
            * (1.0 - rho_hat ** 2) ** ((t - 4) / 2.0) / math.pi)
    return pref * val


def pearson_sample_quantiles(rho: float, t: int, probs) -> np.ndarray:
    """Quantiles of the sample-correlation density by numerical CDF
    inversion on a fixed grid."""
    grid = np.linspace(-1.0 + 1e-9, 1.0 - 1e-9, 4001)
    dens = np.array([pearson_sample_density(rho, r, t) for r in grid])
    cdf = integrate.cumulative_trapezoid(dens, grid, initial=0.0)
    total = cdf[-1]
    if not 0.99 < total < 1.01:
        raise NumericError(f"correlation density integrates to {total}, not 1")
    cdf /= total
    return np.interp(np.asarray(probs), cdf, grid)


# -- reports -------------------------------------------------------------


@dataclass(frozen=True)
class StderrReport:
    """Point estimate with the applicable standard errors and nested
    confidence intervals (list of (level, lo, hi))."""

    statistic: str
    estimate: float
    sample_size: int
    stderr_implied: float | None = None
    stderr_lo: float | None = None
    stderr_mertens: float | None = None
    stderr_gaussian: float | None = None
    confidence_intervals: tuple = ()

    def to_json(self) -> str:
        return json.dumps({
            "statistic": self.statistic,
            "estimate": self.estimate,
            "sample_size": self.sample_size,
            "stderr_implied": self.stderr_implied,
            "stderr_lo": self.stderr_lo,
            "stderr_mertens": self.stderr_mertens,
            "stderr_gaussian": self.stderr_gaussian,
            "confidence_intervals": [list(ci) for ci in self.confidence_intervals],
        })


def _gaussian_ci(est: float, se: float, level: float) -> tuple[float, float, float]:
    z = norm.ppf(0.5 + level / 2.0)
    return (level, est - z * se, est + z * se)


def sharpe_report(rho_hat: float, t: int, levels=_DEFAULT_LEVELS,
                  exact_ci: bool = True) -> StderrReport:
    """Full Sharpe-ratio report from an estimated correlation.

    Implied intervals use the exact correlation sampling density mapped
    through SR(rho); Lo and Mertens are Gaussian approximations around
    the plug-in estimate.
    """
    from .analytics import dimensionless_stats  # local import to avoid cycle

    rho_hat = _check_rho_hat(rho_hat)
    stats = dimensionless_stats(rho_hat)
    sr = stats.sharpe
    implied = stderr_sharpe_implied(rho_hat, t)
    lo = stderr_sharpe_lo(sr, t)
    mertens = stderr_sharpe_mertens(sr, stats.skewness, stats.kurtosis, t)
    cis = []
    for level in sorted(levels):
        if exact_ci:
            q = pearson_sample_quantiles(
                rho_hat, t, [0.5 - level / 2.0, 0.5 + level / 2.0]
            )
            lo_q, hi_q = (dimensionless_stats(r).sharpe for r in q)
            cis.append((level, lo_q, hi_q))
        else:
            cis.append(_gaussian_ci(sr, implied, level))
    return StderrReport(
        statistic="sharpe", estimate=sr, sample_size=t,
        stderr_implied=implied, stderr_lo=lo, stderr_mertens=mertens,
        confidence_intervals=tuple(cis),
    )


def skewness_report(rho_hat: float, t: int, levels=_DEFAULT_LEVELS) -> StderrReport:
    from .analytics import dimensionless_stats

    rho_hat = _check_rho_hat(rho_hat)
    est = dimensionless_stats(rho_hat).skewness
    se = stderr_skew_implied(rho_hat, t)
    gauss, _ = stderr_gaussian_baseline(t)
    cis = tuple(_gaussian_ci(est, se, lv) for lv in sorted(levels))
    return StderrReport(statistic="skewness", estimate=est, sample_size=t,
                        stderr_implied=se, stderr_gaussian=gauss,
                        confidence_intervals=cis)


def kurtosis_report(rho_hat: float, t: int, levels=_DEFAULT_LEVELS) -> StderrReport:
    from .analytics import dimensionless_stats

    rho_hat = _check_rho_hat(rho_hat)
    est = dimensionless_stats(rho_hat).kurtosis
    se = stderr_kurt_implied(rho_hat, t)
    _, gauss = stderr_gaussian_baseline(t)
    cis = tuple(_gaussian_ci(est, se, lv) for lv in sorted(levels))
    return StderrReport(statistic="kurtosis", estimate=est, sample_size=t,
                        stderr_implied=se, stderr_gaussian=gauss,
                        confidence_intervals=cis)
