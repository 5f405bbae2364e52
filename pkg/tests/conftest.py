"""
Shared fixtures for the test suite.
"""

import logging

import numpy as np
import pytest

from src.models import (
    ChainConfig,
    DiscreteLattice,
    GaussianMixture1D,
    IslandComb,
    ProposalSpec,
    SamplerMode,
)
from src.utils.logging_utils import ROOT_LOGGER

# Proposal widths used for the frequency-like coordinate of the comb runs
SIGMA1, SIGMA2, MU = 0.45, 0.2, 1.25
NA, NB = 0.15, 0.95


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def comb_spec():
    return ProposalSpec.three_gaussian(SIGMA1, SIGMA2, MU, NA, NB)


@pytest.fixture
def comb_target():
    return IslandComb(n_modes=5, spacing=MU, mode_width=0.1, weight_decay=0.5)


@pytest.fixture
def bimodal_target():
    return GaussianMixture1D(weights=(0.3, 0.7), centers=(-2.0, 2.0), widths=(0.5, 0.8))


@pytest.fixture
def bimodal_lattice():
    points = tuple(float(p) for p in np.linspace(-2.0, 2.0, 9))
    probabilities = (0.02, 0.15, 0.3, 0.1, 0.01, 0.08, 0.2, 0.1, 0.04)
    return DiscreteLattice(points=points, probabilities=probabilities)


@pytest.fixture
def lattice_spec():
    return ProposalSpec.three_gaussian(0.6, 0.4, 1.5, 0.3, 0.8)


@pytest.fixture
def comb_chain_config(comb_target, comb_spec):
    return ChainConfig(
        target=comb_target,
        spec=comb_spec,
        base_proposal=(0.05,),
        mode=SamplerMode.DELAYED_REJECTION,
        p_dr=0.05,
        n_dr=20,
        n_iterations=2_000,
        seed=7,
        initial_state=(0.0,),
    )


@pytest.fixture(autouse=True)
def reset_package_logger():
    """Drop handlers bound to a previous test's captured stderr."""
    yield
    logger = logging.getLogger(ROOT_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)


@pytest.fixture
def comb_document():
    """Target and proposal sections shared by the JSON config fixtures."""
    return {
        "target": {
            "kind": "island_comb",
            "n_modes": 5,
            "spacing": MU,
            "mode_width": 0.1,
            "weight_decay": 0.5,
        },
        "proposal": {
            "dimensions": [
                {
                    "kind": "three_gaussian",
                    "sigma1": SIGMA1,
                    "sigma2": SIGMA2,
                    "mu": MU,
                    "na": NA,
                    "nb": NB,
                }
            ],
            "base_widths": [0.05],
        },
    }


@pytest.fixture
def experiment_document(comb_document):
    return {
        **comb_document,
        "run": {
            "mode": "delayed_rejection",
            "n_iterations": 400,
            "p_dr": 0.05,
            "n_dr": 10,
            "seed": 3,
            "initial_state": [0.0],
        },
    }


@pytest.fixture
def compare_document(comb_document):
    return {
        **comb_document,
        "start": {"initial_state": [5.0]},
        "runs": [
            {"mode": "baseline_rare_jump", "p_bj": 0.001},
            {"mode": "baseline_frequent_jump", "p_bj": 0.6667},
            {"mode": "delayed_rejection", "p_dr": 0.05, "n_dr": 20},
        ],
        "budget": 3_000,
        "seed": 5,
        "repeats": 2,
    }
