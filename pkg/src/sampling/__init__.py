"""
Sampling package initialization.
"""

from src.sampling.dr_engine import (
    AlphaTable,
    MixtureKernel,
    acceptance_alpha,
    dr_step,
    extend_table,
    forward_reverse_ratio,
)
from src.sampling.proposal import (
    CentralTracker,
    GaussianProposal,
    MixtureProposal,
    central_push,
    dr_proposal_logpdf,
    dr_proposal_sample,
    stage_proposal,
    three_gaussian_logpdf,
    three_gaussian_sample,
)
from src.sampling.sampler import (
    first_passage_iteration,
    mh_step,
    mode_transitions,
    run_chain,
    summarize_run,
)
from src.sampling.targets import (
    build_target,
    cdf,
    log_density,
    mode_centers,
    mode_weights,
    normalization,
)

__all__ = [
    'AlphaTable',
    'CentralTracker',
    'GaussianProposal',
    'MixtureKernel',
    'MixtureProposal',
    'acceptance_alpha',
    'build_target',
    'cdf',
    'central_push',
    'dr_proposal_logpdf',
    'dr_proposal_sample',
    'dr_step',
    'extend_table',
    'first_passage_iteration',
    'forward_reverse_ratio',
    'log_density',
    'mh_step',
    'mode_centers',
    'mode_transitions',
    'mode_weights',
    'normalization',
    'run_chain',
    'stage_proposal',
    'summarize_run',
    'three_gaussian_logpdf',
    'three_gaussian_sample',
]
