"""Command-line surface.

Subcommands: analyze, sweep, fit, optimize, density, simulate, stderr,
figures.  Grids are emitted as CSV, reports as JSON (UTF-8, floats with
17 significant digits); the figures command also renders each bundle to
PNG next to the CSV.

Configuration precedence: command-line flags beat DYNSTRAT_* environment
variables, which beat the JSON config file passed with --config.

Exit codes: 0 ok, 2 usage/validation, 3 data, 4 numeric.
"""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import analytics, costs, density, estimators
from . import stderr as stderr_mod
from .errors import DataError, DegenerateSignalError, NumericError, SampleSizeError, ValidationError
from .montecarlo import SimulationPlan, simulate_strategy, _signal_path
from .process import ReturnProcess, simulate_returns
from .signals import ConvolutionFilter, build_filter, filter_from_json


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _fail(code: int, kind: str, message: str):
    click.echo(json.dumps({"error": kind, "message": message}), err=True)
    sys.exit(code)


def _load_filter(spec: str) -> ConvolutionFilter:
    path = Path(spec)
    text = path.read_text() if path.is_file() else spec
    return filter_from_json(text)


def _load_process(spec: str) -> ReturnProcess:
    path = Path(spec)
    text = path.read_text() if path.is_file() else spec
    return ReturnProcess.from_json(text)


def _read_returns_csv(path: str):
    """Parse a returns CSV (timestamp, return[, asset]) into a dict
    asset -> return array; single unnamed asset maps to ''."""
    series: dict[str, list] = {}
    stamps: dict[str, list] = {}
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from None
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) < 2:
            raise DataError(f"{path}:1: missing header (timestamp,return[,asset])")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 2:
                raise DataError(f"{path}:{lineno}: expected at least 2 columns")
            ts = row[0].strip()
            asset = row[2].strip() if len(row) > 2 else ""
            try:
                val = float(row[1])
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: cannot parse return {row[1]!r}"
                ) from None
            if math.isnan(val):
                raise DataError(f"{path}:{lineno}: NaN return")
            prev = stamps.setdefault(asset, [])
            if prev and ts <= prev[-1]:
                raise DataError(
                    f"{path}:{lineno}: timestamps not strictly increasing"
                )
            prev.append(ts)
            series.setdefault(asset, []).append(val)
    if not series:
        raise DataError(f"{path}: no data rows")
    return {k: np.asarray(v) for k, v in series.items()}


def _single_series(path: str) -> np.ndarray:
    series = _read_returns_csv(path)
    if len(series) > 1:
        raise DataError(f"{path}: expected a single asset, found {len(series)}")
    return next(iter(series.values()))


def _empirical_rho(r: np.ndarray, filt: ConvolutionFilter) -> tuple[float, int]:
    k = len(filt)
    if len(r) - k < 3:
        raise SampleSizeError(
            f"need more than {k + 2} observations for a length-{k} filter, "
            f"got {len(r)}"
        )
    if np.ptp(r) == 0:
        raise DegenerateSignalError("degenerate (constant) return series")
    x = _signal_path(filt.as_array(), r)[k:]
    rr = r[k:]
    # relative threshold: a constant signal leaves only rounding noise
    if np.std(x) <= 1e-12 * max(float(np.max(np.abs(x))), 1e-300):
        raise DegenerateSignalError("degenerate (constant) signal series")
    return float(np.corrcoef(x, rr)[0, 1]), len(rr)


class _Group(click.Group):
    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except (SampleSizeError, ValidationError, click.UsageError) as exc:
            _fail(2, "validation", str(exc))
        except DataError as exc:
            _fail(3, "data", str(exc))
        except NumericError as exc:
            _fail(4, "numeric", str(exc))


def _config_callback(ctx, param, value):
    if value:
        try:
            ctx.default_map = json.loads(Path(value).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"bad config file {value}: {exc}") from None
    return value


@click.group(cls=_Group, context_settings={"auto_envvar_prefix": "DYNSTRAT"})
@click.option("--config", type=click.Path(), callback=_config_callback,
              expose_value=False, is_eager=True,
              help="JSON config file; flags > DYNSTRAT_* env vars > config.")
def main():
    """Closed-form analytics and estimation for linear dynamic
    strategies on stationary Gaussian returns."""


@main.command()
@click.argument("returns_csv", type=click.Path())
@click.option("--filter", "filter_spec", required=True,
              help="Filter JSON (inline or path).")
@click.option("--periods-per-year", default=252.0, show_default=True)
def analyze(returns_csv, filter_spec, periods_per_year):
    """Empirical correlation and plug-in strategy statistics with all
    standard-error variants for a returns CSV."""
    filt = _load_filter(filter_spec)
    r = _single_series(returns_csv)
    rho_hat, t = _empirical_rho(r, filt)
    stats = analytics.dimensionless_stats(rho_hat)
    report = {
        "rho_hat": rho_hat,
        "sample_size": t,
        "sharpe": stats.sharpe,
        "sharpe_annualized": analytics.annualize_sharpe(stats.sharpe, periods_per_year),
        "skewness": stats.skewness,
        "kurtosis": stats.kurtosis,
        "kurtosis_convention": "pearson",
        "jb_statistic": analytics.jb_statistic(t, 0, rho_hat),
        "jb_floor": analytics.jb_floor(t, 0),
        "stderr": {
            "sharpe_implied": stderr_mod.stderr_sharpe_implied(rho_hat, t),
            "sharpe_lo": stderr_mod.stderr_sharpe_lo(stats.sharpe, t),
            "sharpe_mertens": stderr_mod.stderr_sharpe_mertens(
                stats.sharpe, stats.skewness, stats.kurtosis, t),
            "skew_implied": stderr_mod.stderr_skew_implied(rho_hat, t),
            "kurt_implied": stderr_mod.stderr_kurt_implied(rho_hat, t),
            "skew_gaussian": stderr_mod.stderr_gaussian_baseline(t)[0],
            "kurt_gaussian": stderr_mod.stderr_gaussian_baseline(t)[1],
        },
    }
    click.echo(json.dumps(report, indent=2))


_SWEEP_FAMILIES = ("ewma", "sma", "holt-winters-linearized")


@main.command()
@click.argument("returns_csv", type=click.Path())
@click.option("--family", type=click.Choice(_SWEEP_FAMILIES), required=True)
@click.option("--grid", required=True,
              help="Comma-separated parameters; for holt-winters use "
                   "alpha:beta pairs.")
@click.option("--truncation", default=200, show_default=True,
              help="Filter truncation for ewma / holt-winters.")
def sweep(returns_csv, family, grid, truncation):
    """Parameter sweep emitting (param, mse, correlation, sharpe) rows."""
    r = _single_series(returns_csv)
    rows = []
    for token in grid.split(","):
        token = token.strip()
        if family == "ewma":
            lam = float(token)
            filt = build_filter("ewma", lam=lam, k=truncation)
        elif family == "sma":
            filt = build_filter("sma", t=int(token))
        else:
            a, b = (float(p) for p in token.split(":"))
            filt = build_filter("holt_winters", alpha=a, beta=b, k=truncation)
        k = len(filt)
        x = _signal_path(filt.as_array(), r)[k:]
        rr = r[k:]
        if np.std(x) == 0 or np.std(rr) == 0:
            raise DegenerateSignalError(f"degenerate sweep point {token!r}")
        s = x * rr
        mse = float(np.mean((x - rr) ** 2))
        corr = float(np.corrcoef(x, rr)[0, 1])
        sharpe = float(s.mean() / s.std())
        rows.append((token, mse, corr, sharpe))
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["param", "mse", "correlation", "sharpe"])
    for token, mse, corr, sharpe in rows:
        w.writerow([token, _fmt(mse), _fmt(corr), _fmt(sharpe)])
    click.echo(out.getvalue(), nl=False)


@main.command()
@click.argument("returns_csv", type=click.Path())
@click.option("--method", type=click.Choice(["ols", "tls", "cca"]), required=True)
@click.option("--lags", default=5, show_default=True,
              help="Number of lagged-return features (ols/tls).")
@click.option("--standardize/--no-standardize", default=False, show_default=True,
              help="Standardize features before fitting.")
def fit(returns_csv, method, lags, standardize):
    """Fit strategy coefficients by OLS, TLS or (multi-asset) CCA."""
    series = _read_returns_csv(returns_csv)
    if method == "cca":
        if len(series) < 2:
            raise DataError("cca requires a multi-asset returns file")
        n = min(len(v) for v in series.values())
        block = np.column_stack([v[-n:] for v in series.values()])
        returns_block = block[1:]
        signal_block = block[:-1]  # one-period-lagged returns as signals
        res = estimators.cca(returns_block, signal_block)
        click.echo(res.to_json())
        return
    r = _single_series(returns_csv)
    t = len(r)
    if t <= lags + 2:
        raise SampleSizeError(f"need more than {lags + 2} rows, got {t}")
    z = np.column_stack([r[lags - 1 - j: t - 1 - j] for j in range(lags)])
    y = r[lags:]
    if standardize:
        z = (z - z.mean(axis=0)) / z.std(axis=0)
    d = estimators.DesignMatrix(z, y)
    beta = estimators.ols_fit(d) if method == "ols" else estimators.tls_fit(d)
    pred = z @ beta
    corr = float(np.corrcoef(pred, y)[0, 1])
    report = {
        "method": method,
        "coefficients": list(beta),
        "achieved_correlation": corr,
        "implied_sharpe": analytics.dimensionless_stats(corr).sharpe,
        "hat_trace_ols": estimators.hat_trace(d, "ols"),
        "hat_trace_tls": estimators.hat_trace(d, "tls"),
    }
    click.echo(json.dumps(report, indent=2))


@main.command()
@click.option("--k", required=True, type=int, help="Filter length.")
@click.option("--gamma", default=1.0, show_default=True)
@click.option("--nu", default=0.0, show_default=True)
@click.option("--process", "process_spec", required=True,
              help="Process JSON (inline or path).")
@click.option("--seed", default=0, show_default=True)
def optimize(k, gamma, nu, process_spec, seed):
    """Maximize the transaction-cost-aware utility over length-k filters."""
    proc = _load_process(process_spec)
    cost = costs.CostSpec(gamma_risk=gamma, nu=nu)
    filt, utility, converged = costs.optimize_tc_utility(proc, k, cost, seed=seed)
    from .signals import signal_return_correlation, signal_volatility
    report = {
        "coefficients": list(filt.coeffs),
        "utility": utility,
        "converged": converged,
        "achieved_correlation": signal_return_correlation(filt, proc),
        "signal_volatility": signal_volatility(filt, proc),
        "expected_turnover": costs.expected_turnover(filt, proc),
    }
    if not converged:
        report["warning"] = "optimizer budget exhausted; best-found returned"
    click.echo(json.dumps(report, indent=2))


@main.command("density")
@click.option("--rho", default="0,0.2,0.4,0.6,0.8", show_default=True,
              help="Comma-separated correlations.")
@click.option("--sigma-r", default=1.0, show_default=True)
@click.option("--sigma-x", default=1.0, show_default=True)
@click.option("--s-max", default=6.0, show_default=True)
@click.option("--n-points", default=601, show_default=True)
@click.option("--normalize/--no-normalize", default=True, show_default=True,
              help="Rescale each curve to unit variance.")
def density_cmd(rho, sigma_r, sigma_x, s_max, n_points, normalize):
    """(s, pdf) grids of the exact product density, one column per rho."""
    rhos = [float(x) for x in rho.split(",")]
    click.echo(_density_grid_csv(rhos, sigma_r, sigma_x, s_max, n_points,
                                 normalize), nl=False)


def _density_grid_csv(rhos, sigma_r, sigma_x, s_max, n_points, normalize):
    grid = np.linspace(-s_max, s_max, n_points)
    cols = []
    for rho in rhos:
        d = density.ProductDensity(sigma_R=sigma_r, sigma_X=sigma_x, rho=rho)
        sd = math.sqrt(d.variance) if normalize else 1.0
        cols.append([density.product_pdf(s * sd, d) * sd for s in grid])
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["s"] + [f"pdf_rho_{rho:g}" for rho in rhos])
    for i, s in enumerate(grid):
        w.writerow([_fmt(s)] + [_fmt(c[i]) for c in cols])
    return out.getvalue()


@main.command()
@click.option("--process", "process_spec", required=True)
@click.option("--filter", "filter_spec", default=None,
              help="Optional filter; emits strategy returns too.")
@click.option("--length", default=1000, show_default=True)
@click.option("--n-paths", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
def simulate(process_spec, filter_spec, length, n_paths, seed):
    """Simulate return (and optionally strategy) paths as CSV."""
    proc = _load_process(process_spec)
    out = io.StringIO()
    w = csv.writer(out)
    if filter_spec is None:
        w.writerow(["path", "t", "return"])
        for i in range(n_paths):
            r = simulate_returns(proc, length, seed + i)
            for t, val in enumerate(r):
                w.writerow([i, t, _fmt(val)])
    else:
        filt = _load_filter(filter_spec)
        plan = SimulationPlan(proc, filt, length, n_paths, seed)
        s = simulate_strategy(plan)
        w.writerow(["path", "t", "strategy_return"])
        for i in range(n_paths):
            for t, val in enumerate(s[i]):
                w.writerow([i, t, _fmt(val)])
    click.echo(out.getvalue(), nl=False)


@main.command("stderr")
@click.option("--rho-hat", required=True, type=float)
@click.option("--t", "sample_size", required=True, type=int)
@click.option("--exact-ci/--gaussian-ci", default=False, show_default=True,
              help="Exact correlation-density CIs for the implied method.")
def stderr_cmd(rho_hat, sample_size, exact_ci):
    """Sharpe/skewness/kurtosis standard-error comparison report."""
    sharpe = stderr_mod.sharpe_report(rho_hat, sample_size, exact_ci=exact_ci)
    skew = stderr_mod.skewness_report(rho_hat, sample_size)
    kurt = stderr_mod.kurtosis_report(rho_hat, sample_size)
    click.echo(json.dumps({
        "sharpe": json.loads(sharpe.to_json()),
        "skewness": json.loads(skew.to_json()),
        "kurtosis": json.loads(kurt.to_json()),
    }, indent=2))


_FIGURE_IDS = ("moments-vs-rho", "stderr-compare", "density-grid", "ci-tables")


@main.command()
@click.argument("figure_id", type=click.Choice(_FIGURE_IDS))
@click.option("--outdir", type=click.Path(), default=".", show_default=True)
def figures(figure_id, outdir):
    """Plot-ready CSV bundle for a figure, rendered to PNG alongside."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    csv_text = _figure_csv(figure_id)
    csv_path = outdir / f"{figure_id}.csv"
    csv_path.write_text(csv_text)
    png_path = outdir / f"{figure_id}.png"
    _render_figure(figure_id, csv_text, png_path)
    click.echo(json.dumps({"csv": str(csv_path), "png": str(png_path)}))


def _figure_csv(figure_id: str) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    if figure_id == "moments-vs-rho":
        w.writerow(["rho", "sharpe", "skewness", "kurtosis"])
        for rho in np.linspace(-1, 1, 401):
            s = analytics.dimensionless_stats(rho)
            w.writerow([_fmt(rho), _fmt(s.sharpe), _fmt(s.skewness), _fmt(s.kurtosis)])
    elif figure_id == "stderr-compare":
        w.writerow(["rho", "T", "stderr_implied", "stderr_lo", "stderr_mertens"])
        for t in (252, 756, 2520):
            for rho in np.linspace(0.0, 0.95, 96):
                s = analytics.dimensionless_stats(rho)
                w.writerow([
                    _fmt(rho), t,
                    _fmt(stderr_mod.stderr_sharpe_implied(rho, t)),
                    _fmt(stderr_mod.stderr_sharpe_lo(s.sharpe, t)),
                    _fmt(stderr_mod.stderr_sharpe_mertens(
                        s.sharpe, s.skewness, s.kurtosis, t)),
                ])
    elif figure_id == "density-grid":
        # even point count keeps s = 0 (where the pdf diverges) off the grid
        return _density_grid_csv([0.0, 0.2, 0.4, 0.6, 0.8], 1.0, 1.0, 6.0, 600, True)
    elif figure_id == "ci-tables":
        w.writerow(["T", "rho", "method", "stderr", "ci95_lo", "ci95_hi"])
        for t in (252, 756, 2520):
            for rho in (0.0, 0.1, 0.3, 0.5):
                s = analytics.dimensionless_stats(rho)
                rows = {
                    "implied": stderr_mod.stderr_sharpe_implied(rho, t),
                    "lo": stderr_mod.stderr_sharpe_lo(s.sharpe, t),
                    "mertens": stderr_mod.stderr_sharpe_mertens(
                        s.sharpe, s.skewness, s.kurtosis, t),
                }
                for method, val in rows.items():
                    w.writerow([t, _fmt(rho), method, _fmt(val),
                                _fmt(s.sharpe - 1.96 * val),
                                _fmt(s.sharpe + 1.96 * val)])
    return out.getvalue()


def _render_figure(figure_id: str, csv_text: str, png_path: Path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    rows = list(csv.reader(io.StringIO(csv_text)))
    header, data = rows[0], rows[1:]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if figure_id == "moments-vs-rho":
        rho = [float(r[0]) for r in data]
        for i, name in enumerate(header[1:], start=1):
            ax.plot(rho, [float(r[i]) for r in data], label=name)
        ax.set_xlabel("correlation")
        ax.legend()
    elif figure_id == "stderr-compare":
        for t in sorted({r[1] for r in data}):
            sub = [r for r in data if r[1] == t]
            rho = [float(r[0]) for r in sub]
            for i, name in enumerate(header[2:], start=2):
                ax.plot(rho, [float(r[i]) for r in sub],
                        label=f"{name} T={t}", alpha=0.7)
        ax.set_xlabel("correlation")
        ax.set_ylabel("stderr")
        ax.legend(fontsize=6)
    elif figure_id == "density-grid":
        s = [float(r[0]) for r in data]
        for i, name in enumerate(header[1:], start=1):
            ax.plot(s, [float(r[i]) for r in data], label=name)
        ax.set_xlabel("strategy return (unit variance)")
        ax.set_ylim(0, 2.0)
        ax.legend()
    elif figure_id == "ci-tables":
        labels = [f"T={r[0]} rho={r[1]} {r[2]}" for r in data]
        vals = [float(r[3]) for r in data]
        ax.barh(range(len(vals)), vals)
        ax.set_yticks(range(len(vals)))
        ax.set_yticklabels(labels, fontsize=4)
        ax.set_xlabel("stderr")
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


if __name__ == "__main__":
    main()
