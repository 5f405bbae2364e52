"""
Proposal-loss calibration for the 3-Gaussian delayed-rejection proposals.

Every length here is expressed in units of the side-mode offset, so mu = 1
and the widths are the ratios sigma1 / mu and sigma2 / mu. Losses are
expected natural logs of proposal ratios and are non-positive.
"""

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterator, Optional, Sequence, Tuple

import numpy as np
from scipy.special import xlogy

from src.models.calibration_models import (
    NA_AXIS,
    NB_AXIS,
    NDR_AXIS,
    S1_AXIS,
    S2_AXIS,
    CalibrationConfig,
    LossGrid,
    LossKind,
    Recommendation,
    TargetStructure,
)
from src.models.errors import DivergentLossError, InfeasibleRecommendationError
from src.sampling.proposal import LOG_SQRT_2PI, mixture_logpdf, mixture_offsets
from src.utils.grid_cache import GridCache
from src.utils.hashing import content_hash
from src.utils.logging_utils import get_logger
from src.utils.rng import derive_seed, make_rng

logger = get_logger(__name__)

MIN_MC_SAMPLES = 10_000
DEFAULT_BATCH = 2_000
# Upper bound on batch rows times excursion length held in memory at once
MAX_BATCH_ELEMENTS = 2_000_000
# Worst-case CPE loss is taken over excursions at least this long
PLATEAU_N_DR = 100
FINE_POINTS = 1_001

MU = 1.0


def _check_weight(name: str, value: float) -> None:
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")


def _check_widths(sigma1: float, sigma2: float) -> None:
    if not (sigma1 > 0 and sigma2 > 0):
        raise ValueError("widths must be positive")


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def analytic_ap_loss(na: float, nb: float) -> float:
    """
    Well-separated-mode loss of using q_a and q_b with different central weights.

    Raises:
        DivergentLossError: na or nb outside the open interval (0, 1)
    """
    for name, value in (("na", na), ("nb", nb)):
        if not 0.0 < value < 1.0:
            raise DivergentLossError(f"{name}={value}: the loss diverges outside (0, 1)")
    if na == nb:
        return 0.0
    return (na - nb) * math.log((1.0 / na - 1.0) / (1.0 / nb - 1.0))


def analytic_cpe_shift(delta: float, nb: float, sigma1: float, sigma2: float) -> float:
    """Expected log ratio from evaluating q_b at a centre shifted by ``delta``."""
    _check_widths(sigma1, sigma2)
    return -(delta**2 / 2.0) * (nb / sigma1**2 + (1.0 - nb) / sigma2**2)


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _component_density(logf, log_peak, log_coef, sigma, delta):
    """One mixture component's share of the density of L = log q(x)."""
    gap = log_peak - logf
    inside = np.isfinite(gap) & (gap > 0)
    z = np.sqrt(2.0 * np.where(inside, gap, 1.0))
    shift = delta / sigma
    log_value = log_coef + logf - np.log(z) - 0.5 * shift**2 + _log_cosh(shift * z)
    return np.where(inside, np.exp(log_value), 0.0)


def _logratio_density(logf, n, m, sigma1, sigma2, delta):
    _check_weight("n", n)
    _check_weight("m", m)
    _check_widths(sigma1, sigma2)
    logf = np.asarray(logf, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        central = _component_density(
            logf,
            np.log(m) - LOG_SQRT_2PI - np.log(sigma1),
            np.log(2.0 * sigma1) + np.log(n) - np.log(m),
            sigma1,
            delta,
        )
        side = _component_density(
            logf,
            np.log(1.0 - m) - LOG_SQRT_2PI - np.log(2.0 * sigma2),
            np.log(4.0 * sigma2) + np.log(1.0 - n) - np.log(1.0 - m),
            sigma2,
            delta,
        )
    return _scalar_or_array(central + side)


def logratio_density_same(logf, n: float, sigma1: float, sigma2: float):
    """
    Density of log q(x) for x drawn from the same mixture q.

    Args:
        logf: Value(s) of the log-density
        n: Central weight of q
        sigma1: Central width (units of mu)
        sigma2: Side width (units of mu)

    Returns:
        Density at ``logf``; zero outside the support
    """
    return _logratio_density(logf, n, n, sigma1, sigma2, 0.0)


def logratio_density_reweighted(logf, n: float, m: float, sigma1: float, sigma2: float):
    """Density of log q_m(x) for x drawn from q_n (same widths, different weights)."""
    return _logratio_density(logf, n, m, sigma1, sigma2, 0.0)


def logratio_density_shifted(logf, delta: float, n: float, sigma1: float, sigma2: float):
    """Density of log q(x - delta) for x drawn from q."""
    return _logratio_density(logf, n, n, sigma1, sigma2, delta)


def mean_reweighted(n: float, m: float, sigma1: float, sigma2: float) -> float:
    """E[log q_m(x)] for x ~ q_n, with 0 log 0 taken as 0."""
    _check_weight("n", n)
    _check_weight("m", m)
    _check_widths(sigma1, sigma2)
    return float(
        -0.5
        - n * (LOG_SQRT_2PI + math.log(sigma1))
        + xlogy(n, m)
        - (1.0 - n) * (LOG_SQRT_2PI + math.log(2.0 * sigma2))
        + xlogy(1.0 - n, 1.0 - m)
    )


def mean_same(n: float, sigma1: float, sigma2: float) -> float:
    return mean_reweighted(n, n, sigma1, sigma2)


def mean_shifted(delta: float, n: float, sigma1: float, sigma2: float) -> float:
    return mean_same(n, sigma1, sigma2) + analytic_cpe_shift(delta, n, sigma1, sigma2)


def _check_samples(n_samples: int) -> None:
    if n_samples < MIN_MC_SAMPLES:
        raise ValueError(f"n_samples must be at least {MIN_MC_SAMPLES}, got {n_samples}")


def _batches(n_samples: int, batch_size: int) -> Iterator[int]:
    done = 0
    while done < n_samples:
        size = min(batch_size, n_samples - done)
        done += size
        yield size


def _mean_and_stderr(chunks) -> Tuple[float, float]:
    values = np.concatenate(chunks)
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(len(values)))


def mc_ap_loss(
    rng: np.random.Generator,
    s1_over_mu: float,
    s2_over_mu: float,
    na: float,
    nb: float,
    n_samples: int,
    excursion_length: int = 2,
    batch_size: int = DEFAULT_BATCH,
) -> Tuple[float, float]:
    """
    Monte Carlo asymmetric-proposal loss.

    From lambda = 0, beta_1 is drawn from q_a and every later beta from q_b at
    the running mean of the earlier betas, up to beta_L. The sample is the
    log of the two boundary ratios
    q_a(beta_L, beta_{L-1}) / q_a(lambda, beta_1) and
    q_b(xbar, lambda) / q_b(xbar, beta_L), xbar = mean(beta_1 .. beta_{L-1}).

    Returns:
        (mean log ratio, standard error)
    """
    _check_samples(n_samples)
    if excursion_length < 2:
        raise ValueError("excursion_length must be at least 2")
    q_a = (s1_over_mu, s2_over_mu, MU, na)
    q_b = (s1_over_mu, s2_over_mu, MU, nb)

    chunks = []
    for size in _batches(n_samples, batch_size):
        first = mixture_offsets(rng, *q_a, size)
        previous, latest = first, first
        running = first.copy()
        for m in range(2, excursion_length + 1):
            anchor = running / (m - 1)
            previous, latest = latest, anchor + mixture_offsets(rng, *q_b, size)
            running = running + latest
        chunks.append(
            mixture_logpdf(previous - latest, *q_a)
            - mixture_logpdf(first, *q_a)
            + mixture_logpdf(-anchor, *q_b)
            - mixture_logpdf(latest - anchor, *q_b)
        )
    return _mean_and_stderr(chunks)


def mc_cpe_loss(
    rng: np.random.Generator,
    s1_over_mu: float,
    s2_over_mu: float,
    nb: float,
    n_dr: int,
    n_samples: int,
    batch_size: int = DEFAULT_BATCH,
) -> Tuple[float, float]:
    """
    Monte Carlo central-proposal-evolution loss of an n_dr-stage excursion.

    The interior chain beta_1 = 0, beta_2 .. beta_{n_dr - 1} is generated with
    q_b anchored at the running mean of the earlier elements. The sample is
    the sum of the reverse-path interior log proposals (anchor: mean of the
    later elements) minus the forward ones (anchor: mean of the earlier
    elements).

    Returns:
        (mean log ratio, standard error); exactly zero for n_dr = 3
    """
    _check_samples(n_samples)
    if n_dr < 3:
        raise ValueError("n_dr must be at least 3")
    q_b = (s1_over_mu, s2_over_mu, MU, nb)
    length = n_dr - 1
    rows = max(1, min(batch_size, MAX_BATCH_ELEMENTS // length))
    counts = np.arange(length - 1, 0, -1)

    chunks = []
    for size in _batches(n_samples, rows):
        betas = np.zeros((size, length))
        running = np.zeros(size)
        forward = np.zeros(size)
        for m in range(1, length):
            step = mixture_offsets(rng, *q_b, size)
            betas[:, m] = running / m + step
            forward += mixture_logpdf(step, *q_b)
            running += betas[:, m]
        suffix = np.cumsum(betas[:, ::-1], axis=1)[:, ::-1]
        reverse_anchor = suffix[:, 1:] / counts
        reverse = mixture_logpdf(betas[:, :-1] - reverse_anchor, *q_b).sum(axis=1)
        chunks.append(reverse - forward)
    return _mean_and_stderr(chunks)


def ap_validity_rms(
    rng: np.random.Generator,
    s1_over_mu: float,
    s2_over_mu: float,
    na_grid: Sequence[float],
    nb_grid: Sequence[float],
    n_samples: int,
    batch_size: int = DEFAULT_BATCH,
) -> float:
    """RMS over the na x nb grid of the Monte Carlo minus the closed-form AP loss."""
    diffs = [
        mc_ap_loss(rng, s1_over_mu, s2_over_mu, na, nb, n_samples, batch_size=batch_size)[0]
        - analytic_ap_loss(na, nb)
        for na, nb in itertools.product(na_grid, nb_grid)
    ]
    return float(np.sqrt(np.mean(np.square(diffs))))


def _evaluate_cell(job: dict) -> Tuple[float, float]:
    """Evaluate one grid cell; module level so process pools can pickle it."""
    rng = make_rng(job["seed"])
    p = job["params"]
    kind = LossKind(job["kind"])
    if kind == LossKind.AP:
        return mc_ap_loss(
            rng, p[S1_AXIS], p[S2_AXIS], p[NA_AXIS], p[NB_AXIS],
            job["n_samples"], job["excursion_length"], job["batch_size"],
        )
    if kind == LossKind.CPE:
        return mc_cpe_loss(
            rng, p[S1_AXIS], p[S2_AXIS], p[NB_AXIS], int(p[NDR_AXIS]),
            job["n_samples"], job["batch_size"],
        )
    rms = ap_validity_rms(
        rng, p[S1_AXIS], p[S2_AXIS], job["na_grid"], job["nb_grid"],
        job["n_samples"], job["batch_size"],
    )
    return rms, math.nan


def _build_jobs(config: CalibrationConfig):
    names = config.kind.axes
    axes = {name: tuple(getattr(config, name)) for name in names}
    jobs = []
    for cell in itertools.product(*axes.values()):
        job = {
            "kind": config.kind.value,
            "params": dict(zip(names, cell)),
            "n_samples": config.n_samples,
            "excursion_length": config.excursion_length,
            "batch_size": config.batch_size,
        }
        if config.kind == LossKind.VALIDITY:
            job["na_grid"] = list(config.na)
            job["nb_grid"] = list(config.nb)
        key = content_hash({**job, "master_seed": config.seed})
        job["key"] = key
        job["seed"] = derive_seed(config.seed, int(key[:16], 16))
        jobs.append(job)
    return axes, jobs


def loss_grid(
    config: CalibrationConfig,
    cache: Optional[GridCache] = None,
    threads: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> LossGrid:
    """
    Evaluate every cell of the configured sweep.

    Each cell has its own rng stream derived from the master seed and the
    hash of the cell parameters, so results do not depend on evaluation
    order or on the number of workers.

    Args:
        config: Sweep definition
        cache: Optional content-addressed cell cache
        threads: Worker processes; 1 evaluates in-process
        progress: Optional callback receiving (cells done, total cells)

    Returns:
        LossGrid with one value and standard error per cell
    """
    axes, jobs = _build_jobs(config)
    results = [None] * len(jobs)
    pending = []
    for i, job in enumerate(jobs):
        cached = cache.get(job["key"]) if cache is not None else None
        if cached is not None:
            results[i] = (cached["value"], cached["stderr"])
        else:
            pending.append(i)

    logger.info(
        "Calibrating %s grid: %d cells, %d cached",
        config.kind.value,
        len(jobs),
        len(jobs) - len(pending),
    )
    work = [jobs[i] for i in pending]
    if threads > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = pool.map(_evaluate_cell, work)
            _collect(outcomes, pending, jobs, results, cache, progress)
    else:
        _collect(map(_evaluate_cell, work), pending, jobs, results, cache, progress)

    shape = tuple(len(values) for values in axes.values())
    return LossGrid(
        kind=config.kind,
        axes=axes,
        values=np.array([r[0] for r in results], dtype=float).reshape(shape),
        stderr=np.array([r[1] for r in results], dtype=float).reshape(shape),
        mc_samples=config.n_samples,
    )


def _collect(outcomes, pending, jobs, results, cache, progress) -> None:
    for done, (i, (value, stderr)) in enumerate(zip(pending, outcomes), start=1):
        results[i] = (float(value), float(stderr))
        if cache is not None:
            job = jobs[i]
            cache.put(job["key"], {"value": value, "stderr": stderr, "params": job["params"]})
        if progress is not None:
            progress(done, len(pending))


def ap_loss_grid(config: CalibrationConfig, **kwargs) -> LossGrid:
    return loss_grid(config.model_copy(update={"kind": LossKind.AP}), **kwargs)


def cpe_loss_grid(config: CalibrationConfig, **kwargs) -> LossGrid:
    return loss_grid(config.model_copy(update={"kind": LossKind.CPE}), **kwargs)


def validity_grid(config: CalibrationConfig, **kwargs) -> LossGrid:
    return loss_grid(config.model_copy(update={"kind": LossKind.VALIDITY}), **kwargs)


def _nearest_cell(grid: LossGrid, s1: float, s2: float) -> Tuple[int, int]:
    i = int(np.argmin(np.abs(np.log(grid.axis(S1_AXIS)) - math.log(s1))))
    j = int(np.argmin(np.abs(np.log(grid.axis(S2_AXIS)) - math.log(s2))))
    return i, j


def _smallest_passing(axis: np.ndarray, losses: np.ndarray, tolerance: float):
    """Smallest value on a fine linear sweep of ``axis`` whose loss is >= tolerance."""
    order = np.argsort(axis)
    axis, losses = axis[order], losses[order]
    fine = np.linspace(axis[0], axis[-1], FINE_POINTS)
    fine_losses = np.interp(fine, axis, losses)
    passing = np.flatnonzero(fine_losses >= tolerance)
    if not len(passing):
        return None, float(fine_losses.max())
    k = passing[0]
    return float(fine[k]), float(fine_losses[k])


def recommend_parameters(
    target_structure: TargetStructure,
    loss_tolerance_ap: float,
    loss_tolerance_cpe: float,
    ap_grid: LossGrid,
    cpe_grid: LossGrid,
    n_dr: Optional[int] = None,
) -> Recommendation:
    """
    Four-step proposal choice from precomputed loss maps.

    1. mu is the mode spacing and sigma1, sigma2 the mode widths; the maps are
       read at the nearest (sigma1/mu, sigma2/mu) cell in log space.
    2. nb is the smallest value whose worst-case CPE loss over n_dr >= 100
       (the longest available n_dr otherwise) is at least loss_tolerance_cpe.
    3. na is the smallest value whose AP loss, interpolated bilinearly at
       that nb, is at least loss_tolerance_ap.
    4. n_dr is passed through; it defaults to the longest n_dr on the CPE map.

    Tolerances are log-ratio floors in nats (e.g. -4 for e^-4).

    Raises:
        InfeasibleRecommendationError: no weight meets a tolerance
    """
    mu = target_structure.mode_spacing
    sigma1, sigma2 = target_structure.mode_widths
    s1, s2 = sigma1 / mu, sigma2 / mu

    ci, cj = _nearest_cell(cpe_grid, s1, s2)
    cell = (float(cpe_grid.axis(S1_AXIS)[ci]), float(cpe_grid.axis(S2_AXIS)[cj]))
    cpe_slice = cpe_grid.values[ci, cj]
    ndr_axis = cpe_grid.axis(NDR_AXIS)
    long_runs = ndr_axis >= PLATEAU_N_DR
    if long_runs.any():
        worst = cpe_slice[:, long_runs].min(axis=1)
    else:
        worst = cpe_slice[:, int(np.argmax(ndr_axis))]
    nb, cpe_loss = _smallest_passing(cpe_grid.axis(NB_AXIS), worst, loss_tolerance_cpe)
    if nb is None:
        raise InfeasibleRecommendationError(
            f"no nb reaches the CPE tolerance {loss_tolerance_cpe} at cell {cell}",
            report={
                "step": "cpe",
                "grid_cell": list(cell),
                "tolerance": loss_tolerance_cpe,
                "best_loss": cpe_loss,
            },
        )

    ai, aj = _nearest_cell(ap_grid, s1, s2)
    ap_slice = ap_grid.values[ai, aj]
    nb_axis = ap_grid.axis(NB_AXIS)
    order = np.argsort(nb_axis)
    at_nb = np.array([np.interp(nb, nb_axis[order], row[order]) for row in ap_slice])
    na, ap_loss = _smallest_passing(ap_grid.axis(NA_AXIS), at_nb, loss_tolerance_ap)
    if na is None:
        raise InfeasibleRecommendationError(
            f"no na reaches the AP tolerance {loss_tolerance_ap} at nb={nb:.3f}",
            report={
                "step": "ap",
                "grid_cell": list(cell),
                "nb": nb,
                "tolerance": loss_tolerance_ap,
                "best_loss": ap_loss,
            },
        )

    return Recommendation(
        sigma1=sigma1,
        sigma2=sigma2,
        mu=mu,
        na=na,
        nb=nb,
        n_dr=int(n_dr if n_dr is not None else ndr_axis.max()),
        grid_cell=cell,
        expected_ap_loss=ap_loss,
        expected_cpe_loss=cpe_loss,
    )
