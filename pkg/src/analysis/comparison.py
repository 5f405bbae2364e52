"""
Fixed-budget comparison of the baseline and delayed-rejection samplers.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.analysis.diagnostics import summarize_series
from src.models.chain_models import SamplerMode
from src.models.experiment_models import (
    CompareConfig,
    ComparisonReport,
    ComparisonRow,
)
from src.sampling.sampler import first_passage_iteration, mode_transitions, run_chain
from src.sampling.targets import build_target, mode_centers, mode_weights
from src.utils.hashing import content_hash
from src.utils.logging_utils import get_logger
from src.utils.rng import derive_seed

logger = get_logger(__name__)

MIN_TAU_SAMPLES = 10


def dominant_mode(config: CompareConfig) -> Tuple[float, float]:
    """Centre of the highest-weight mode and the half-width that counts as inside it."""
    target = build_target(config.target)
    centers = mode_centers(target)
    center = float(centers[int(np.argmax(mode_weights(target)))])
    if config.dominant_half_width is not None:
        return center, float(config.dominant_half_width)
    if len(centers) > 1:
        spacing = float(np.min(np.diff(np.sort(centers))))
    else:
        spacing = 1.0
    return center, spacing / 2.0


def _compare_cell(job: dict) -> ComparisonRow:
    config: CompareConfig = job["config"]
    run = config.runs[job["run_index"]]
    chain = run_chain(config.chain_config(run, job["seed"]), max_target_evals=config.budget)

    dim = config.monitor_dim
    passage = first_passage_iteration(chain, dim, job["center"], job["half_width"])
    tau_int = None
    if passage is not None and chain.n_iterations + 1 - passage >= MIN_TAU_SAMPLES:
        tau_int = summarize_series(chain.states[passage:, dim]).tau_int

    return ComparisonRow(
        mode=run.mode,
        repeat=job["repeat"],
        seed=job["seed"],
        n_iterations=chain.n_iterations,
        total_target_evals=chain.total_target_evals,
        first_passage=passage,
        tau_int=tau_int,
        mode_transitions=mode_transitions(chain, dim, job["centers"]),
    )


def compare_modes(
    config: CompareConfig,
    threads: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
) -> ComparisonReport:
    """
    Run every configured mode until the shared evaluation budget is spent.

    All modes of a repeat share the seed derive_seed(config.seed, repeat).
    tau_int is measured on the monitored coordinate after its first passage
    into the dominant mode.

    Args:
        config: Validated comparison configuration
        threads: Worker processes; 1 runs in-process
        progress: Optional callback receiving (chains done, total chains)

    Returns:
        ComparisonReport with one row per (repeat, mode)
    """
    center, half_width = dominant_mode(config)
    centers = mode_centers(build_target(config.target)).tolist()
    jobs: List[dict] = []
    for repeat in range(config.repeats):
        seed = derive_seed(config.seed, repeat)
        for run_index in range(len(config.runs)):
            jobs.append(
                {
                    "config": config,
                    "run_index": run_index,
                    "repeat": repeat,
                    "seed": seed,
                    "center": center,
                    "half_width": half_width,
                    "centers": centers,
                }
            )

    logger.info(
        "Comparing %d modes over %d repeats at budget %d",
        len(config.runs),
        config.repeats,
        config.budget,
    )
    rows = []
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outcomes = pool.map(_compare_cell, jobs)
            for done, row in enumerate(outcomes, start=1):
                rows.append(row)
                if progress is not None:
                    progress(done, len(jobs))
    else:
        for done, job in enumerate(jobs, start=1):
            rows.append(_compare_cell(job))
            if progress is not None:
                progress(done, len(jobs))

    return ComparisonReport(
        config_hash=content_hash(config),
        budget=config.budget,
        monitor_dim=config.monitor_dim,
        dominant_center=center,
        dominant_half_width=half_width,
        rows=tuple(rows),
    )


def ordering_counts(report: ComparisonReport, speedup: float = 10.0) -> dict:
    """
    Count the repeats in which delayed rejection beats both baselines.

    A repeat counts for mixing when mode C's tau_int is below mode B's. It
    counts for passage when mode C reaches the dominant mode at least
    ``speedup`` times sooner than mode A. A run of mode A that never arrives
    is censored at its chain length.
    """
    by_repeat: Dict[int, Dict[SamplerMode, ComparisonRow]] = {}
    for row in report.rows:
        by_repeat.setdefault(row.repeat, {})[row.mode] = row

    mixing = passage = 0
    for rows in by_repeat.values():
        rare = rows.get(SamplerMode.BASELINE_RARE_JUMP)
        frequent = rows.get(SamplerMode.BASELINE_FREQUENT_JUMP)
        delayed = rows.get(SamplerMode.DELAYED_REJECTION)
        if delayed is None:
            continue
        if (
            frequent is not None
            and delayed.tau_int is not None
            and frequent.tau_int is not None
            and delayed.tau_int < frequent.tau_int
        ):
            mixing += 1
        if rare is not None and delayed.first_passage is not None:
            rare_passage = rare.first_passage if rare.first_passage is not None else rare.n_iterations
            if speedup * delayed.first_passage <= rare_passage:
                passage += 1
    return {"repeats": len(by_repeat), "mixing": mixing, "passage": passage}
