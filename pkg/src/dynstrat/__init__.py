"""Closed-form analytics for linear dynamic trading strategies on
stationary Gaussian returns.

The one-period strategy return is S_t = X_t R_t where the signal
X_t = sum_k phi(k) R_{t-k} is a causal convolution of past returns.
Everything downstream (Sharpe, skewness, kurtosis, standard errors,
the exact product density, transaction-cost utilities and multi-period
extensions) is a closed form in the filter coefficients and the return
autocorrelation function, and each closed form has an independent
Monte-Carlo verification path in :mod:`dynstrat.montecarlo`.
"""

from .analytics import (
    DimensionlessStats,
    JointGaussianSpec,
    MultiAssetStats,
    QuadraticFormMoments,
    StrategyStats,
    annualize_sharpe,
    dimensionless_stats,
    jb_floor,
    jb_statistic,
    mgf_moments_oracle,
    multi_asset_stats,
    multiperiod_sharpe,
    nonzero_mean_stats,
    product_moments,
    quadratic_form_moments,
)
from .costs import CostSpec, expected_turnover, optimize_tc_utility, tc_utility
from .density import (
    ProductDensity,
    TailRegimes,
    bessel_k0,
    bivariate_gaussian_pdf,
    product_pdf,
    product_pdf_numeric,
    tail_exponents,
)
from .errors import (
    DataError,
    DegenerateSignalError,
    DynstratError,
    NumericError,
    SampleSizeError,
    ValidationError,
)
from .estimators import (
    CcaResult,
    DesignMatrix,
    cca,
    hat_trace,
    min_acf_eigen_filter,
    ols_fit,
    tls_fit,
)
from .montecarlo import (
    EmpiricalMoments,
    SimulationPlan,
    convergence_demo,
    coverage_experiment,
    empirical_moments,
    simulate_product_draws,
    simulate_strategy,
)
from .process import ReturnProcess, acf_toeplitz, arma_acf, simulate_returns
from .signals import (
    ConvolutionFilter,
    build_filter,
    cross_correlation,
    filter_from_json,
    signal_acf,
    signal_return_correlation,
    signal_variance,
    signal_volatility,
)
from .stderr import (
    StderrReport,
    kurtosis_report,
    pearson_sample_density,
    pearson_sample_quantiles,
    sharpe_report,
    skewness_report,
    stderr_gaussian_baseline,
    stderr_kurt_implied,
    stderr_rho,
    stderr_sharpe_implied,
    stderr_sharpe_implied_from_sr,
    stderr_sharpe_lo,
    stderr_sharpe_mertens,
    stderr_skew_implied,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
