"""
Analysis package initialization.
"""

from src.analysis.calibration import (
    analytic_ap_loss,
    analytic_cpe_shift,
    ap_loss_grid,
    ap_validity_rms,
    cpe_loss_grid,
    loss_grid,
    mc_ap_loss,
    mc_cpe_loss,
    recommend_parameters,
    validity_grid,
)
from src.analysis.comparison import compare_modes, ordering_counts
from src.analysis.diagnostics import (
    autocorrelation,
    dr_variance_gain,
    effective_sample_size,
    estimate_variance,
    fit_tau_exp,
    integrated_time,
    simulate_variance_gain,
    summarize_chain,
)
from src.analysis.oracle import (
    build_discrete_kernel,
    direct_alpha,
    discrete_mh_kernel,
    stationarity_residual,
)

__all__ = [
    'analytic_ap_loss',
    'analytic_cpe_shift',
    'ap_loss_grid',
    'ap_validity_rms',
    'autocorrelation',
    'build_discrete_kernel',
    'compare_modes',
    'cpe_loss_grid',
    'direct_alpha',
    'discrete_mh_kernel',
    'dr_variance_gain',
    'effective_sample_size',
    'estimate_variance',
    'fit_tau_exp',
    'integrated_time',
    'loss_grid',
    'mc_ap_loss',
    'mc_cpe_loss',
    'ordering_counts',
    'recommend_parameters',
    'simulate_variance_gain',
    'stationarity_residual',
    'summarize_chain',
    'validity_grid',
]
