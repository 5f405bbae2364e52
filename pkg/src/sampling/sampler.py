"""
Outer Metropolis-Hastings loop with probabilistic entry into delayed rejection.
"""

from collections import Counter
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from src.models.chain_models import (
    Chain,
    ChainConfig,
    ChainSummary,
    DrStats,
    KindStats,
    ProposalKind,
    SamplerMode,
)
from src.models.dr_models import ZeroAwareLog
from src.sampling.dr_engine import acceptance_alpha, dr_step
from src.sampling.proposal import GaussianProposal, MixtureProposal, stage_proposal
from src.sampling.targets import as_target, build_target, evaluate_log_target
from src.utils.hashing import content_hash
from src.utils.logging_utils import get_logger
from src.utils.rng import make_rng

logger = get_logger(__name__)

ProgressCallback = Callable[[int, Optional[int]], None]


class MhOutcome(NamedTuple):
    state: np.ndarray
    log_target: float
    accepted: bool
    n_target_evals: int


def mh_step(
    rng: np.random.Generator,
    current,
    target,
    proposal: MixtureProposal,
    log_target_current: Optional[float] = None,
) -> MhOutcome:
    """
    One Metropolis-Hastings transition.

    The proposal ratio is included even though every built-in proposal is
    symmetric. Random draws happen in the order proposal, then acceptance
    uniform, which is also the order of a single-stage DR excursion.

    Args:
        rng: Random stream
        current: Present state
        target: TargetSpec or built target
        proposal: Any object with ``sample(rng, anchor)`` and ``logpdf(anchor, x)``
        log_target_current: Cached log pi(current); evaluated when omitted

    Returns:
        MhOutcome with the next state; n_target_evals counts the candidate
        only unless the current state had to be evaluated too
    """
    target = as_target(target)
    current = np.asarray(current, dtype=float).reshape(-1)
    n_evals = 0
    if log_target_current is None:
        log_target_current = evaluate_log_target(target, current)
        n_evals += 1

    candidate = proposal.sample(rng, current)
    log_target_candidate = evaluate_log_target(target, candidate)
    n_evals += 1

    num = ZeroAwareLog.from_log(log_target_candidate).times(
        ZeroAwareLog.from_log(proposal.logpdf(candidate, current))
    )
    den = ZeroAwareLog.from_log(log_target_current).times(
        ZeroAwareLog.from_log(proposal.logpdf(current, candidate))
    )
    alpha, _ = acceptance_alpha(num, den)
    if rng.random() < alpha:
        return MhOutcome(candidate, log_target_candidate, True, n_evals)
    return MhOutcome(current, log_target_current, False, n_evals)


def initial_state(config: ChainConfig, rng: np.random.Generator) -> np.ndarray:
    """Configured start, or a uniform draw from the configured box."""
    if config.initial_state is not None:
        return np.asarray(config.initial_state, dtype=float)
    low, high = (np.asarray(corner, dtype=float) for corner in config.initial_box)
    return rng.uniform(low, high)


def run_chain(
    config: ChainConfig,
    max_target_evals: Optional[int] = None,
    progress: Optional[ProgressCallback] = None,
) -> Chain:
    """
    Generate a chain in the configured mode.

    Every iteration first draws a selector uniform. In delayed-rejection mode
    it enters a DR excursion when the selector is below p_dr and makes an
    ordinary base-proposal MH step otherwise. The baseline modes make an MH
    step with the q_a big-jump proposal when the selector is below p_bj and
    with the base proposal otherwise.

    Args:
        config: Validated chain configuration
        max_target_evals: Stop at the first iteration boundary where the
            cumulative target evaluations reach this budget (n_iterations is
            then ignored); the initial-state evaluation is not counted
        progress: Optional callback receiving (iterations done, planned total)

    Returns:
        Chain with n_iterations + 1 states
    """
    rng = make_rng(config.seed)
    target = build_target(config.target)
    base = GaussianProposal(config.base_proposal)
    big_jump = stage_proposal(config.spec, 1)

    current = initial_state(config, rng)
    log_target = evaluate_log_target(target, current)
    if log_target == -np.inf:
        raise ValueError("initial state has zero target density")

    planned = None if max_target_evals is not None else config.n_iterations
    logger.info(
        "Starting %s chain (mode %s, seed %d, %s)",
        config.mode.value,
        config.mode.label,
        config.seed,
        f"{planned} iterations" if planned else f"budget {max_target_evals} evaluations",
    )

    states = [current]
    accepted, dr_stage, target_evals, kinds = [], [], [], []
    total_evals = 0
    iteration = 0
    while True:
        if planned is not None and iteration >= planned:
            break
        if planned is None and total_evals >= max_target_evals:
            break

        selector = rng.random()
        if config.mode == SamplerMode.DELAYED_REJECTION and selector < config.p_dr:
            outcome = dr_step(rng, current, log_target, target, config.spec, config.n_dr)
            kind = ProposalKind.DR
            evals = outcome.n_target_evals
            stage = outcome.accepted_stage or 0
            if outcome.accepted:
                current, log_target = outcome.accepted_state, outcome.log_target
            was_accepted = outcome.accepted
        else:
            if config.mode != SamplerMode.DELAYED_REJECTION and selector < config.p_bj:
                proposal, kind = big_jump, ProposalKind.BIG_JUMP
            else:
                proposal, kind = base, ProposalKind.BASE
            step = mh_step(rng, current, target, proposal, log_target_current=log_target)
            current, log_target = step.state, step.log_target
            evals, stage, was_accepted = step.n_target_evals, 0, step.accepted

        states.append(current)
        accepted.append(was_accepted)
        dr_stage.append(stage)
        target_evals.append(evals)
        kinds.append(kind.value)
        total_evals += evals
        iteration += 1
        if progress is not None:
            progress(iteration, planned)

    logger.info("Finished chain: %d iterations, %d target evaluations", iteration, total_evals)
    return Chain(
        states=np.vstack(states),
        accepted=np.asarray(accepted, dtype=bool),
        dr_stage=np.asarray(dr_stage, dtype=np.int64),
        target_evals=np.asarray(target_evals, dtype=np.int64),
        proposal_kinds=np.asarray(kinds, dtype=object),
    )


def summarize_run(chain: Chain, config: ChainConfig) -> ChainSummary:
    """Acceptance rates by proposal kind plus DR entry and cost statistics."""
    kinds = chain.proposal_kinds
    proposed = Counter(kinds.tolist())
    rates = {}
    for kind in (ProposalKind.BASE, ProposalKind.BIG_JUMP, ProposalKind.DR):
        mask = kinds == kind.value
        n = int(proposed.get(kind.value, 0))
        hits = int(chain.accepted[mask].sum())
        rates[kind.value] = KindStats(
            proposed=n, accepted=hits, rate=hits / n if n else None
        ).model_dump()

    dr_mask = kinds == ProposalKind.DR.value
    accepted_stages = chain.dr_stage[dr_mask & chain.accepted]
    dr = DrStats(
        entries=int(dr_mask.sum()),
        acceptances=len(accepted_stages),
        mean_accepted_stage=float(accepted_stages.mean()) if len(accepted_stages) else None,
        target_evals=int(chain.target_evals[dr_mask].sum()),
    )

    notes = []
    if config.mode == SamplerMode.DELAYED_REJECTION and config.p_dr == 0:
        notes.append("p_dr = 0: delayed rejection never entered")
    if config.mode != SamplerMode.DELAYED_REJECTION and config.p_dr > 0:
        notes.append("p_dr is ignored outside delayed-rejection mode")

    return ChainSummary(
        config_hash=content_hash(config),
        seed=config.seed,
        mode=config.mode,
        n_iterations=chain.n_iterations,
        total_target_evals=chain.total_target_evals,
        acceptance_rates=rates,
        dr=dr,
        notes=notes,
    )


def nearest_mode(values, centers: Sequence[float]) -> np.ndarray:
    """Index into ``centers`` of the nearest centre for every value."""
    centers = np.asarray(centers, dtype=float)
    order = np.argsort(centers)
    midpoints = (centers[order][1:] + centers[order][:-1]) / 2.0
    return order[np.searchsorted(midpoints, np.asarray(values, dtype=float))]


def mode_transitions(chain: Chain, dim: int, centers: Sequence[float]) -> int:
    """Number of moves of coordinate ``dim`` between nearest-mode basins."""
    labels = nearest_mode(chain.states[:, dim], centers)
    return int(np.count_nonzero(np.diff(labels)))


def first_passage_iteration(
    chain: Chain, dim: int, center: float, half_width: float
) -> Optional[int]:
    """First state index whose coordinate lies within center ± half_width."""
    inside = np.flatnonzero(np.abs(chain.states[:, dim] - center) <= half_width)
    return int(inside[0]) if len(inside) else None
