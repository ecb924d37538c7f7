"""Causal convolution filters and their joint statistics with returns.

The signal is X_t = sum_{k>=1} phi(k) R_{t-k}: strictly causal, so there
is never weight at lag 0.  Given the return ACF, the signal volatility,
the signal/return correlation and all cross-correlations follow in
closed form from the filter coefficients and the Toeplitz ACF matrix.

Convention: rho(k) = corr(X_t, R_{t-k}); the strategy-relevant
correlation is rho(0) = corr(X_t, R_t), where X_t only uses returns up
to t-1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSignalError, ValidationError
from .process import ReturnProcess, acf_toeplitz, _check_invertible, _check_stationary

_EWMA_TAIL_MASS = 1e-10


@dataclass(frozen=True)
class ConvolutionFilter:
    """Finite causal filter; coeffs[i] is the weight on R_{t-1-i}."""

    coeffs: tuple[float, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) < 1:
            raise ValidationError("filter must have at least one coefficient")
        if not all(math.isfinite(c) for c in self.coeffs):
            raise ValidationError("filter coefficients must be finite")

    def __len__(self) -> int:
        return len(self.coeffs)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs)

    def scaled(self, factor: float) -> "ConvolutionFilter":
        return ConvolutionFilter(tuple(factor * c for c in self.coeffs), self.label)

    def to_json(self) -> str:
        return json.dumps({"label": self.label, "coeffs": list(self.coeffs)})

    def coeffs_csv(self) -> str:
        lines = ["lag,coefficient"]
        lines += [f"{k + 1},{c!r}" for k, c in enumerate(self.coeffs)]
        return "\n".join(lines) + "\n"


def _ewma_weights(lam: float, k) -> np.ndarray:
    if not 0 < lam < 1:
        raise ValidationError(f"EWMA decay must be in (0,1), got {lam}")
    if k == "auto" or k is None:
        # keep terms until the discarded tail mass lambda^K is negligible
        k = max(1, math.ceil(math.log(_EWMA_TAIL_MASS) / math.log(lam)))
    k = int(k)
    if k < 1:
        raise ValidationError(f"EWMA truncation must be >= 1, got {k}")
    # (1 - lam)/lam * lam^j for j = 1..K sums to 1 as K -> inf
    return (1 - lam) * lam ** np.arange(k)


def _triangular_weights(t: int) -> np.ndarray:
    t = int(t)
    if t < 2:
        raise ValidationError(f"triangular window must be >= 2, got {t}")
    # price minus its T-period SMA, rewritten on returns: (T-k)/T, k=1..T-1
    k = np.arange(1, t)
    return (t - k) / t


def _arma_forecast_weights(ar, ma, k: int) -> np.ndarray:
    """One-step-ahead ARMA predictor as a truncated AR(inf) filter.

    pi(L) = 1 - (1 - sum a_i L^i) / (1 + sum th_j L^j), truncated at K.
    """
    ar, ma = tuple(ar), tuple(ma)
    _check_stationary(ar)
    _check_invertible(ma)
    k = int(k)
    if k < 1:
        raise ValidationError(f"truncation must be >= 1, got {k}")
    p, q = len(ar), len(ma)
    # power-series division: d = ar_poly / ma_poly, then pi_j = -d_j (j>=1)
    d = np.zeros(k + 1)
    d[0] = 1.0
    for j in range(1, k + 1):
        num = -ar[j - 1] if j <= p else 0.0
        num -= sum(ma[i - 1] * d[j - i] for i in range(1, min(j, q) + 1))
        d[j] = num
    return -d[1:]


def _holt_winters_weights(alpha: float, beta: float, k: int) -> np.ndarray:
    """Linear-filter representation of the one-step Holt-Winters
    (double exponential smoothing) forecast, truncated at K.

    The level/trend recursion with zero initial state is linear in the
    observations, so the weight on y_{t-j} is the forecast response to
    a unit impulse at lag j.
    """
    if not 0 < alpha < 1 or not 0 <= beta < 1:
        raise ValidationError(f"invalid Holt-Winters parameters ({alpha}, {beta})")
    k = int(k)
    if k < 1:
        raise ValidationError(f"truncation must be >= 1, got {k}")
    weights = np.empty(k)
    for j in range(1, k + 1):
        y = np.zeros(j)
        y[0] = 1.0  # impulse at y_{t-j}
        level = trend = prev_level = 0.0
        for obs in y:
            prev_level, level = level, alpha * obs + (1 - alpha) * (level + trend)
            trend = beta * (level - prev_level) + (1 - beta) * trend
        weights[j - 1] = level + trend
    return weights


def build_filter(kind: str, **params) -> ConvolutionFilter:
    """Construct one of the catalog filters.

    Kinds: sma(t), ewma(lam, k='auto'), triangular(t),
    sma_diff(t1, t2), ewma_diff(lam1, lam2, k='auto'),
    arma_forecast(ar, ma, k), holt_winters(alpha, beta, k).
    """
    kind = kind.replace("-", "_").lower()
    if kind == "sma":
        t = int(params["t"])
        if t < 1:
            raise ValidationError(f"SMA window must be >= 1, got {t}")
        coeffs = np.full(t, 1.0 / t)
        label = f"sma({t})"
    elif kind == "ewma":
        coeffs = _ewma_weights(params["lam"], params.get("k", "auto"))
        label = f"ewma({params['lam']})"
    elif kind == "triangular":
        coeffs = _triangular_weights(params["t"])
        label = f"triangular({params['t']})"
    elif kind == "sma_diff":
        t1, t2 = int(params["t1"]), int(params["t2"])
        if not 1 <= t1 < t2:
            raise ValidationError(f"need 1 <= t1 < t2, got ({t1}, {t2})")
        # SMA(t1) - SMA(t2) of prices = triangular(t2) - triangular(t1) on returns
        w = np.zeros(t2 - 1)
        w += _triangular_weights(t2)
        if t1 > 1:
            w[: t1 - 1] -= _triangular_weights(t1)
        coeffs = w
        label = f"sma_diff({t1},{t2})"
    elif kind == "ewma_diff":
        lam1, lam2 = params["lam1"], params["lam2"]
        k = params.get("k", "auto")
        if k == "auto" or k is None:
            k = max(len(_ewma_weights(lam1, "auto")), len(_ewma_weights(lam2, "auto")))
        w1 = _ewma_weights(lam1, k)
        w2 = _ewma_weights(lam2, k)
        coeffs = w1 - w2
        label = f"ewma_diff({lam1},{lam2})"
    elif kind == "arma_forecast":
        coeffs = _arma_forecast_weights(params["ar"], params["ma"], params["k"])
        label = f"arma_forecast({list(params['ar'])},{list(params['ma'])})"
    elif kind == "holt_winters":
        coeffs = _holt_winters_weights(params["alpha"], params["beta"], params["k"])
        label = f"holt_winters({params['alpha']},{params['beta']})"
    else:
        raise ValidationError(f"unknown filter kind {kind!r}")
    return ConvolutionFilter(tuple(coeffs), label)


def filter_from_json(text: str) -> ConvolutionFilter:
    """Build a filter from a JSON spec, either explicit coefficients
    {"coeffs": [...]} or a kind + parameters record such as
    {"kind": "ewma", "lambda": 0.9, "k": 200}."""
    obj = json.loads(text)
    if "coeffs" in obj:
        return ConvolutionFilter(tuple(obj["coeffs"]), obj.get("label", ""))
    kind = obj.pop("kind")
    if "lambda" in obj:
        obj["lam"] = obj.pop("lambda")
    if "lambda1" in obj:
        obj["lam1"] = obj.pop("lambda1")
    if "lambda2" in obj:
        obj["lam2"] = obj.pop("lambda2")
    obj = {k: (tuple(v) if isinstance(v, list) else v) for k, v in obj.items()}
    obj.pop("label", None)
    return build_filter(kind, **obj)


def _quadratic_form(filt: ConvolutionFilter, process: ReturnProcess) -> float:
    phi = filt.as_array()
    c = acf_toeplitz(process, len(phi))
    return float(phi @ c @ phi)


def signal_variance(filt: ConvolutionFilter, process: ReturnProcess) -> float:
    """Var(X_t) = sigma_R^2 * phi' C phi."""
    return process.sigma ** 2 * _quadratic_form(filt, process)


def signal_volatility(filt: ConvolutionFilter, process: ReturnProcess) -> float:
    return math.sqrt(signal_variance(filt, process))


def _norm_or_raise(filt: ConvolutionFilter, process: ReturnProcess) -> float:
    q = _quadratic_form(filt, process)
    if q <= 1e-300:
        raise DegenerateSignalError(f"zero-variance signal for filter {filt.label!r}")
    return math.sqrt(q)


def signal_return_correlation(filt: ConvolutionFilter, process: ReturnProcess) -> float:
    """corr(X_t, R_t) = sum_k phi(k) c(k) / sqrt(phi' C phi)."""
    phi = filt.as_array()
    acf = process._acf_values(len(phi))[1:]
    return float(phi @ acf) / _norm_or_raise(filt, process)


def cross_correlation(filt: ConvolutionFilter, process: ReturnProcess, lag: int) -> float:
    """rho(lag) = corr(X_t, R_{t-lag}) = sum_k phi(k) c(k-lag) / sqrt(phi' C phi).

    Positive lag means the return lags the signal; rho(0) is the
    contemporaneous (strategy) correlation.
    """
    phi = filt.as_array()
    k = np.arange(1, len(phi) + 1)
    max_abs = int(np.max(np.abs(k - lag)))
    c = process._acf_values(max_abs)
    num = float(phi @ c[np.abs(k - lag)])
    return num / _norm_or_raise(filt, process)


def signal_acf(filt: ConvolutionFilter, process: ReturnProcess, lag: int) -> float:
    """Autocorrelation of the signal, D(lag) = corr(X_t, X_{t-lag})."""
    phi = filt.as_array()
    n = len(phi)
    lag = abs(int(lag))
    c = process._acf_values(n - 1 + lag)
    i = np.arange(1, n + 1)
    shifted = c[np.abs(i[:, None] - i[None, :] + lag)]
    q = _quadratic_form(filt, process)
    if q <= 1e-300:
        raise DegenerateSignalError(f"zero-variance signal for filter {filt.label!r}")
    return float(phi @ shifted @ phi) / q
