"""Strategy-fitting machinery: OLS, total least squares, hat-matrix
degrees of freedom, canonical correlation analysis and the
ACF min-eigenvector filter.

TLS is computed from the SVD of the concatenation [R, Z] (no
normal-equation inversion); the closed-form route
(Z'Z - sigma_{k+1}^2 I)^{-1} Z'R and the null-vector (PCA) route are
both evaluated and must agree, otherwise the problem is flagged
degenerate.  CCA whitens with Cholesky factors and reduces to an
ordinary SVD, preserving symmetry.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DegenerateSignalError, ValidationError
from .signals import ConvolutionFilter

_TLS_AGREE_TOL = 1e-8
_TLS_DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class DesignMatrix:
    """Feature matrix Z (T x k) with target return sequence R."""

    features: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        z = np.atleast_2d(np.asarray(self.features, dtype=float))
        r = np.asarray(self.target, dtype=float).ravel()
        if z.ndim != 2:
            raise ValidationError("features must be a 2-d array")
        if z.shape[0] != r.shape[0]:
            raise ValidationError(
                f"features rows ({z.shape[0]}) != target length ({r.shape[0]})"
            )
        if z.shape[0] <= z.shape[1] or z.shape[1] < 1:
            raise ValidationError(f"need T > k >= 1, got T={z.shape[0]}, k={z.shape[1]}")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(r))):
            raise ValidationError("non-finite entries in design")
        object.__setattr__(self, "features", z)
        object.__setattr__(self, "target", r)

    @property
    def k(self) -> int:
        return self.features.shape[1]

    @property
    def t(self) -> int:
        return self.features.shape[0]


def ols_fit(d: DesignMatrix) -> np.ndarray:
    """Least-squares coefficients (Z'Z)^-1 Z'R."""
    z, r = d.features, d.target
    beta, _, rank, _ = np.linalg.lstsq(z, r, rcond=None)
    if rank < d.k:
        raise ValidationError(f"rank-deficient design: rank {rank} < k {d.k}")
    return beta


def _tls_svd(d: DesignMatrix):
    """Thin SVD of the concatenation [R, Z]; returns (lam, sigma, v)
    with lam the singular values of Z, sigma those of [R, Z] and v the
    right singular vectors of [R, Z]."""
    z, r = d.features, d.target
    concat = np.column_stack([r, z])
    _, sing, vt = np.linalg.svd(concat, full_matrices=False)
    lam = np.linalg.svd(z, compute_uv=False)
    return lam, sing, vt.T


def tls_fit(d: DesignMatrix) -> np.ndarray:
    """Total-least-squares coefficients.

    Uses the smallest right singular vector of [R, Z] (the PCA route)
    and cross-checks the closed form
    (Z'Z - sigma_{k+1}^2 I)^{-1} Z'R; raises if the smallest singular
    value is (numerically) repeated, where the solution is not unique.
    """
    z, r = d.features, d.target
    lam, sing, v = _tls_svd(d)
    s_min = sing[-1]
    scale = max(sing[0], 1.0)
    if (lam[-1] - s_min) < _TLS_DEGENERACY_TOL * scale:
        raise DegenerateSignalError(
            f"degenerate TLS problem: lambda_k={lam[-1]:.3e} ~ "
            f"sigma_k+1={s_min:.3e}"
        )
    null = v[:, -1]
    if abs(null[0]) < 1e-12:
        raise DegenerateSignalError("TLS null vector has no target component")
    beta_pca = -null[1:] / null[0]
    beta_formula = linalg.solve(
        z.T @ z - s_min ** 2 * np.eye(d.k), z.T @ r, assume_a="sym"
    )
    denom = max(np.linalg.norm(beta_pca), 1.0)
    if np.linalg.norm(beta_pca - beta_formula) / denom > _TLS_AGREE_TOL:
        raise DegenerateSignalError(
            "TLS routes disagree: "
            f"pca={beta_pca}, formula={beta_formula}"
        )
    return beta_pca


def hat_trace(d: DesignMatrix, method: str = "ols") -> float:
    """Effective degrees of freedom tr(M) of the fit's smoother.

    OLS: exactly k.  TLS: sum_i lambda_i^2 / (lambda_i^2 - sigma_{k+1}^2),
    always >= k by singular-value interlacing.
    """
    method = method.lower()
    if method == "ols":
        lam = np.linalg.svd(d.features, compute_uv=False)
        if lam[-1] < 1e-12 * max(lam[0], 1.0):
            raise ValidationError("rank-deficient design")
        return float(d.k)
    if method == "tls":
        lam, sing, _ = _tls_svd(d)
        s_min = sing[-1]
        if (lam[-1] - s_min) < _TLS_DEGENERACY_TOL * max(sing[0], 1.0):
            raise DegenerateSignalError("degenerate TLS problem")
        return float(np.sum(lam ** 2 / (lam ** 2 - s_min ** 2)))
    raise ValidationError(f"unknown method {method!r}")


@dataclass(frozen=True)
class CcaResult:
    """Canonical correlations with unit-norm weight vectors, sorted
    non-increasing."""

    correlations: np.ndarray
    return_weights: np.ndarray  # columns w_k
    signal_weights: np.ndarray  # columns v_k

    @property
    def sharpes(self) -> np.ndarray:
        """Per-canonical-strategy Sharpe r_k / sqrt(r_k^2 + 1)."""
        r = self.correlations
        return r / np.sqrt(r ** 2 + 1.0)

    def to_json(self) -> str:
        return json.dumps({
            "correlations": self.correlations.tolist(),
            "return_weights": self.return_weights.tolist(),
            "signal_weights": self.signal_weights.tolist(),
            "sharpes": self.sharpes.tolist(),
        })


def cca(returns: np.ndarray, signals: np.ndarray) -> CcaResult:
    """Canonical correlation analysis of the return block vs the
    signal block via Cholesky whitening and one SVD.

    The canonical strategies S_k = (v_k . X)(w_k . R) are pairwise
    decorrelated with correlations r_k.  Raises if a covariance block
    is numerically singular (no silent ridge is applied).
    """
    r = np.atleast_2d(np.asarray(returns, dtype=float))
    x = np.atleast_2d(np.asarray(signals, dtype=float))
    if r.shape[0] != x.shape[0]:
        raise ValidationError("blocks must have the same number of rows")
    t, n = r.shape
    m = x.shape[1]
    if t <= n + m:
        raise ValidationError(f"need T > N + M, got T={t}, N={n}, M={m}")
    rc = r - r.mean(axis=0)
    xc = x - x.mean(axis=0)
    s_rr = rc.T @ rc / (t - 1)
    s_xx = xc.T @ xc / (t - 1)
    s_rx = rc.T @ xc / (t - 1)
    try:
        l_r = np.linalg.cholesky(s_rr)
        l_x = np.linalg.cholesky(s_xx)
    except np.linalg.LinAlgError:
        raise ValidationError(
            "singular covariance block; regularization needed"
        ) from None
    cond = max(np.linalg.cond(s_rr), np.linalg.cond(s_xx))
    if cond > 1e12:
        raise ValidationError(
            f"near-singular covariance block (cond={cond:.2e}); "
            "regularization needed"
        )
    kmat = linalg.solve_triangular(l_r, s_rx, lower=True)
    kmat = linalg.solve_triangular(l_x, kmat.T, lower=True).T
    u, s, vt = np.linalg.svd(kmat)
    ncomp = min(n, m)
    w = linalg.solve_triangular(l_r.T, u[:, :ncomp], lower=False)
    v = linalg.solve_triangular(l_x.T, vt.T[:, :ncomp], lower=False)
    w /= np.linalg.norm(w, axis=0)
    v /= np.linalg.norm(v, axis=0)
    return CcaResult(correlations=np.clip(s[:ncomp], 0.0, 1.0),
                     return_weights=w, signal_weights=v)


def min_acf_eigen_filter(c_tilde: np.ndarray) -> ConvolutionFilter:
    """Correlation-maximizing filter under a known ACF matrix.

    c_tilde is the (K+1) x (K+1) ACF matrix of (R_t, ..., R_{t-K});
    the filter coefficients are a_k = -v(k+1) / v(1) for v the
    eigenvector of the smallest eigenvalue.
    """
    c = np.atleast_2d(np.asarray(c_tilde, dtype=float))
    if c.shape[0] != c.shape[1] or c.shape[0] < 2:
        raise ValidationError("c_tilde must be square with dimension >= 2")
    if not np.allclose(c, c.T, atol=1e-10):
        raise ValidationError("c_tilde must be symmetric")
    vals, vecs = np.linalg.eigh(c)
    gap = vals[1] - vals[0]
    if gap < 1e-10 * max(abs(vals[-1]), 1.0):
        raise DegenerateSignalError(
            "smallest ACF eigenvalue is (numerically) repeated; "
            "the maximizing filter is not unique"
        )
    v = vecs[:, 0]
    if abs(v[0]) < 1e-12:
        raise DegenerateSignalError("eigenvector has zero leading component")
    coeffs = -v[1:] / v[0]
    return ConvolutionFilter(tuple(coeffs), label="min-acf-eigen")
