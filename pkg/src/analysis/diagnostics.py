"""
Autocorrelation diagnostics and the variance gain of collapsing DR excursions.
"""

from typing import Optional

import numpy as np
from scipy import fft
from scipy.signal import lfilter

from src.models.diagnostics_models import (
    CONSTANT_SERIES,
    NON_EXPONENTIAL,
    NON_POSITIVE_RHO,
    WINDOW_NOT_CONVERGED,
    AcfResult,
    ChainDiagnostics,
    DimensionDiagnostics,
    VarianceGainEstimate,
)
from src.models.errors import DegenerateSeriesError
from src.utils.logging_utils import get_logger

logger = get_logger(__name__)

# Self-consistent window: smallest M with M >= WINDOW_FACTOR * tau_int(M)
WINDOW_FACTOR = 6.0


def autocorrelation(series, max_lag: int) -> AcfResult:
    """
    Biased (1/N) sample autocorrelation about the sample mean, via FFT.

    Args:
        series: 1-dimension samples
        max_lag: Largest lag returned; 1 <= max_lag < len(series)

    Returns:
        AcfResult with rho and c0 filled; a constant series is flagged with
        c0 = 0 and rho set to NaN
    """
    x = np.asarray(series, dtype=float).ravel()
    n = len(x)
    if max_lag < 1 or n <= max_lag:
        raise ValueError(f"need len(series) > max_lag >= 1, got {n} and {max_lag}")
    lags = np.arange(max_lag + 1)

    if np.ptp(x) == 0:
        rho = np.full(max_lag + 1, np.nan)
        return AcfResult(lags=lags, rho=rho, c0=0.0, n_samples=n, flags=[CONSTANT_SERIES])

    centered = x - x.mean()
    size = fft.next_fast_len(2 * n)
    spectrum = fft.rfft(centered, n=size)
    acov = fft.irfft(spectrum * np.conjugate(spectrum), n=size)[: max_lag + 1] / n
    rho = acov / acov[0]
    rho[0] = 1.0
    return AcfResult(lags=lags, rho=rho, c0=float(acov[0]), n_samples=n)


def _require_variation(acf: AcfResult) -> None:
    if acf.is_constant:
        raise DegenerateSeriesError("series is constant; autocorrelation is undefined")


def integrated_time(acf: AcfResult) -> AcfResult:
    """
    tau_int = 1/2 + sum of rho(n) up to the self-consistent window.

    Returns:
        Copy of ``acf`` with tau_int and window set; flagged
        window_not_converged when the window reaches max_lag
    """
    _require_variation(acf)
    taus = 0.5 + np.cumsum(acf.rho[1:])
    windows = np.arange(1, len(taus) + 1)
    converged = np.flatnonzero(windows >= WINDOW_FACTOR * taus)
    if len(converged):
        i = converged[0]
        return acf.model_copy(update={"tau_int": float(taus[i]), "window": int(windows[i])})
    logger.debug("tau_int window did not converge before lag %d", acf.max_lag)
    return acf.with_flag(
        WINDOW_NOT_CONVERGED, tau_int=float(taus[-1]), window=int(windows[-1])
    )


def estimate_variance(series, acf: AcfResult) -> float:
    """Variance of the sample mean, 2 tau_int C(0) / N."""
    _require_variation(acf)
    if acf.tau_int is None:
        acf = integrated_time(acf)
    return 2.0 * acf.tau_int * acf.c0 / len(np.asarray(series).ravel())


def fit_tau_exp(acf: AcfResult, fit_window: Optional[int] = None) -> AcfResult:
    """
    Exponential autocorrelation time from a least-squares fit of log rho(n).

    Without ``fit_window`` the fit runs over lags [1, window] and stops before
    the first rho at or below the noise floor 3 / sqrt(N).

    Args:
        acf: Autocorrelation (window taken from integrated_time when present)
        fit_window: Explicit upper lag of the fit

    Returns:
        Copy of ``acf`` with tau_exp set, or flagged non_exponential /
        non_positive_rho
    """
    _require_variation(acf)
    floor = 3.0 / np.sqrt(acf.n_samples)
    if acf.rho[1] <= floor:
        return acf.with_flag(NON_EXPONENTIAL, tau_exp=None)

    upper = min(fit_window or acf.window or acf.max_lag, acf.max_lag)
    rho = acf.rho[1 : upper + 1]
    result = acf
    if fit_window is not None:
        cut = np.flatnonzero(rho <= 0)
        if len(cut):
            result = result.with_flag(NON_POSITIVE_RHO)
    else:
        cut = np.flatnonzero(rho <= floor)
    if len(cut):
        rho = rho[: cut[0]]

    if len(rho) < 2:
        return result.with_flag(NON_EXPONENTIAL, tau_exp=None)
    slope, _ = np.polyfit(np.arange(1, len(rho) + 1), np.log(rho), 1)
    if slope >= 0:
        return result.with_flag(NON_EXPONENTIAL, tau_exp=None)
    return result.model_copy(update={"tau_exp": float(-1.0 / slope)})


def effective_sample_size(acf: AcfResult) -> float:
    if acf.tau_int is None:
        acf = integrated_time(acf)
    return acf.n_samples / (2.0 * acf.tau_int)


def dr_variance_gain(m1: int, m2: int, tau_exp: float) -> float:
    """
    Closed-form relative variance excess (var_A - var_B) / var_B.

    Chain B holds one element per DR excursion; chain A is the same chain in
    which one element per period of m1 + 1 is repeated m2 times. The
    underlying correlation is rho(n) = exp(-|n| / tau_exp).

    Args:
        m1: Elements between repeated blocks, >= 1
        m2: Length of each repeated block, >= 1
        tau_exp: Exponential autocorrelation time, > 0

    Returns:
        Non-negative relative excess
    """
    if m1 < 1 or m2 < 1:
        raise ValueError("m1 and m2 must be at least 1")
    if not tau_exp > 0:
        raise ValueError("tau_exp must be positive")
    prefactor = ((m2 - 1) / (m1 + m2)) ** 2
    period = m1 + 1
    bracket = period / np.tanh(period / (2.0 * tau_exp)) * np.tanh(1.0 / (2.0 * tau_exp)) - 1.0
    return float(prefactor * bracket)


def simulate_variance_gain(
    rng: np.random.Generator,
    m1: int,
    m2: int,
    tau_exp: float,
    n_periods: int = 2_000,
    n_replicas: int = 500,
    n_bootstrap: int = 200,
) -> VarianceGainEstimate:
    """
    Monte Carlo counterpart of dr_variance_gain.

    Each replica is a stationary AR(1) chain B with coefficient exp(-1/tau_exp);
    chain A repeats the first element of every period m2 times. The gain is
    the ratio of the across-replica variances of the two chain means, minus 1,
    with a bootstrap standard error over replicas.
    """
    if n_replicas < 2:
        raise ValueError("at least two replicas are needed for a variance")
    closed_form = dr_variance_gain(m1, m2, tau_exp)
    phi = np.exp(-1.0 / tau_exp)
    length = n_periods * (m1 + 1)

    start = rng.standard_normal(n_replicas)
    noise = rng.standard_normal((n_replicas, length))
    chain_b, _ = lfilter(
        [np.sqrt(1.0 - phi**2)], [1.0, -phi], noise, axis=1, zi=(phi * start)[:, np.newaxis]
    )
    counts = np.ones(length, dtype=np.int64)
    counts[:: m1 + 1] = m2
    chain_a = np.repeat(chain_b, counts, axis=1)

    means_a = chain_a.mean(axis=1)
    means_b = chain_b.mean(axis=1)

    def gain(idx):
        return np.var(means_a[idx], ddof=1) / np.var(means_b[idx], ddof=1) - 1.0

    estimate = float(gain(np.arange(n_replicas)))
    resamples = rng.integers(0, n_replicas, size=(n_bootstrap, n_replicas))
    stderr = float(np.std([gain(idx) for idx in resamples], ddof=1))
    logger.debug("Variance gain %.4f +- %.4f (closed form %.4f)", estimate, stderr, closed_form)
    return VarianceGainEstimate(
        mean=estimate, stderr=stderr, n_replicas=n_replicas, closed_form=closed_form
    )


def default_max_lag(n_samples: int) -> int:
    return min(n_samples - 1, max(1, n_samples // 4))


def summarize_series(series, max_lag: Optional[int] = None) -> DimensionDiagnostics:
    x = np.asarray(series, dtype=float).ravel()
    acf = autocorrelation(x, max_lag or default_max_lag(len(x)))
    if acf.is_constant:
        return DimensionDiagnostics(c0=0.0, flags=list(acf.flags))
    acf = fit_tau_exp(integrated_time(acf))
    return DimensionDiagnostics(
        tau_int=acf.tau_int,
        tau_exp=acf.tau_exp,
        window=acf.window,
        c0=acf.c0,
        variance_of_mean=estimate_variance(x, acf),
        effective_sample_size=effective_sample_size(acf),
        flags=list(acf.flags),
    )


def summarize_chain(
    states, discard: int = 0, max_lag: Optional[int] = None, source: str = ""
) -> ChainDiagnostics:
    """
    Per-coordinate diagnostics after dropping the first ``discard`` states.

    Args:
        states: Array of shape (n, ndim)
        discard: Leading states excluded (burn-in)
        max_lag: Largest ACF lag; defaults to min(n - 1, max(1, n // 4))
        source: Label recorded in the result (usually the chain file)
    """
    states = np.asarray(states, dtype=float)
    if states.ndim == 1:
        states = states[:, np.newaxis]
    if discard < 0 or discard >= len(states) - 1:
        raise ValueError(
            f"discard={discard} leaves fewer than two of {len(states)} states"
        )
    kept = states[discard:]
    lag = max_lag or default_max_lag(len(kept))
    dimensions = {
        f"x{d}": summarize_series(kept[:, d], lag) for d in range(kept.shape[1])
    }
    return ChainDiagnostics(
        source=source,
        discard=discard,
        n_samples=len(kept),
        max_lag=lag,
        dimensions=dimensions,
    )
