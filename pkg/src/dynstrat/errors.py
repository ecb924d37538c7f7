"""Exception hierarchy shared across the library.

The CLI maps these onto exit codes: validation/usage -> 2, data -> 3,
numeric -> 4.
"""


class DynstratError(Exception):
    """Base class for all library errors."""


class ValidationError(DynstratError, ValueError):
    """Invalid model or parameter values (non-stationary AR roots,
    out-of-range correlations, bad filter parameters, ...)."""


class DegenerateSignalError(ValidationError):
    """A signal with zero variance, or an estimator whose solution is
    not unique (e.g. repeated smallest singular value in TLS)."""


class SampleSizeError(ValidationError):
    """Sample too small for the requested statistic."""


class DataError(DynstratError):
    """Malformed or inconsistent input data (CSV parse failures,
    non-monotone timestamps, NaNs)."""


class NumericError(DynstratError):
    """Quadrature non-convergence or other numerical failure; carries
    diagnostics in the message."""
