"""Stationary Gaussian return models.

A return process is characterised by its per-period volatility and its
autocorrelation function (ACF).  White noise, AR, MA and ARMA models are
supported; the ACF is obtained from the MA(inf) (Wold) representation of
the model and truncated once the coefficients are machine-negligible.

Simulation uses the counter-based Philox generator so that paths are
reproducible across platforms and safe to parallelise by seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, signal

from .errors import ValidationError

# magnitude below which Wold coefficients are treated as zero
_WOLD_TOL = 1e-14
_MAX_WOLD_TERMS = 200_000


def _check_stationary(ar: tuple[float, ...]) -> None:
    """Raise unless the AR polynomial 1 - a1 z - ... - ap z^p has all
    roots strictly outside the unit circle."""
    if not ar:
        return
    # np.roots wants highest degree first: -a_p z^p - ... - a_1 z + 1
    poly = np.r_[-np.asarray(ar)[::-1], 1.0]
    roots = np.roots(poly)
    if roots.size and np.min(np.abs(roots)) <= 1.0 + 1e-12:
        raise ValidationError(
            f"non-stationary AR coefficients {ar!r}: root inside/on unit circle"
        )


def _check_invertible(ma: tuple[float, ...]) -> None:
    if not ma:
        return
    poly = np.r_[np.asarray(ma)[::-1], 1.0]
    roots = np.roots(poly)
    if roots.size and np.min(np.abs(roots)) <= 1.0 + 1e-12:
        raise ValidationError(
            f"non-invertible MA coefficients {ma!r}: root inside/on unit circle"
        )


def _wold_coefficients(ar: tuple[float, ...], ma: tuple[float, ...]) -> np.ndarray:
    """MA(inf) coefficients psi of the ARMA model, truncated at _WOLD_TOL.

    psi_0 = 1, psi_j = theta_j + sum_i a_i psi_{j-i}.
    """
    p, q = len(ar), len(ma)
    if p == 0:
        return np.r_[1.0, ma]
    psi = [1.0]
    j = 1
    while j < _MAX_WOLD_TERMS:
        v = ma[j - 1] if j <= q else 0.0
        v += sum(ar[i] * psi[j - 1 - i] for i in range(min(j, p)))
        psi.append(v)
        # safe to stop once past the MA part and the recent tail is negligible
        if j > q and all(abs(x) < _WOLD_TOL for x in psi[-max(p, 1):]):
            break
        j += 1
    return np.asarray(psi)


@dataclass(frozen=True)
class ReturnProcess:
    """Zero-mean covariance-stationary Gaussian return model.

    Parameters
    ----------
    sigma : float
        Per-period return volatility (standard deviation of R_t).
    ar, ma : tuple of float
        ARMA coefficients; both empty means white noise.
    """

    sigma: float = 1.0
    ar: tuple[float, ...] = ()
    ma: tuple[float, ...] = ()
    _acf_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValidationError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(m) for m in self.ma))
        _check_stationary(self.ar)

    @property
    def kind(self) -> str:
        if not self.ar and not self.ma:
            return "white-noise"
        if not self.ma:
            return "ar"
        if not self.ar:
            return "ma"
        return "arma"

    @property
    def order(self) -> int:
        return max(len(self.ar), len(self.ma))

    def wold(self) -> np.ndarray:
        """Truncated MA(inf) coefficients (psi_0 = 1)."""
        return _wold_coefficients(self.ar, self.ma)

    def acf(self, lag: int) -> float:
        """Autocorrelation c(lag); c(0) = 1 and c(-k) = c(k)."""
        lag = abs(int(lag))
        vals = self._acf_values(lag)
        return float(vals[lag])

    def _acf_values(self, max_lag: int) -> np.ndarray:
        vals = self._acf_cache.get("vals")
        if vals is None or len(vals) <= max_lag:
            vals = arma_acf(self.ar, self.ma, max_lag)
            self._acf_cache["vals"] = vals
        return vals[: max_lag + 1]

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "sigma": self.sigma,
             "ar": list(self.ar), "ma": list(self.ma)}
        )

    @classmethod
    def from_json(cls, text: str) -> "ReturnProcess":
        obj = json.loads(text)
        return cls(sigma=obj.get("sigma", 1.0),
                   ar=tuple(obj.get("ar", [])), ma=tuple(obj.get("ma", [])))


def arma_acf(ar, ma, max_lag: int) -> np.ndarray:
    """Theoretical ACF of an ARMA model at lags 0..max_lag.

    Computed from the Wold representation: gamma(k) is the lag-k inner
    product of the MA(inf) coefficients.  Raises for unit-root or
    explosive AR parameters.
    """
    ar, ma = tuple(ar), tuple(ma)
    _check_stationary(ar)
    psi = _wold_coefficients(ar, ma)
    n = len(psi)
    gamma = np.array(
        [psi[: n - k] @ psi[k:] if k < n else 0.0 for k in range(max_lag + 1)]
    )
    return gamma / gamma[0]


def acf_toeplitz(process: ReturnProcess, k: int) -> np.ndarray:
    """k x k Toeplitz matrix with entries c(|i - j|)."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    c = process._acf_values(k - 1) if k > 1 else np.array([1.0])
    return linalg.toeplitz(c[:k])


def simulate_returns(process: ReturnProcess, length: int, seed: int) -> np.ndarray:
    """Sample path of the process, deterministic for fixed seed.

    Marginals are N(0, sigma^2); a burn-in of max(10 * model order, 1000)
    samples is discarded so the returned path is stationary from index 0.
    """
    if length < 1:
        raise ValidationError(f"length must be >= 1, got {length}")
    rng = np.random.Generator(np.random.Philox(seed))
    burn = max(10 * process.order, 1000)
    psi = process.wold()
    sigma_eps = process.sigma / np.sqrt(psi @ psi)
    eps = rng.standard_normal(length + burn) * sigma_eps
    ar_poly = np.r_[1.0, -np.asarray(process.ar)]
    ma_poly = np.r_[1.0, np.asarray(process.ma)]
    path = signal.lfilter(ma_poly, ar_poly, eps)
    return path[burn:]
