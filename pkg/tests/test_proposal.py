"""
Tests for the 3-Gaussian proposal densities and the central tracker.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import integrate, stats
from scipy.stats import norm

from src.models import ProposalSpec, ThreeGaussianDimension, ThreeGaussianParams
from src.models.errors import DimensionMismatchError
from src.sampling.proposal import (
    CentralTracker,
    GaussianProposal,
    central_push,
    dr_proposal_logpdf,
    dr_proposal_sample,
    three_gaussian_logpdf,
    three_gaussian_sample,
)

FREQUENCY = ThreeGaussianParams(sigma1=0.45, sigma2=0.2, mu=1.25, weight_center=0.95)


def mixture_cdf(x, center, params):
    n = params.weight_center
    return (
        n * norm.cdf(x, center, params.sigma1)
        + (1 - n) / 2 * norm.cdf(x, center + params.mu, params.sigma2)
        + (1 - n) / 2 * norm.cdf(x, center - params.mu, params.sigma2)
    )


class TestThreeGaussianDensity:
    def test_collapses_to_standard_normal(self):
        params = ThreeGaussianParams(sigma1=1.0, sigma2=1.0, mu=0.0, weight_center=0.5)
        assert three_gaussian_logpdf(0.0, 0.0, params) == pytest.approx(-0.91894, abs=1e-5)

    @pytest.mark.parametrize("d", [0.1, 1.3, 7.0])
    def test_symmetric_about_center(self, d):
        center = 0.37
        assert three_gaussian_logpdf(center, center + d, FREQUENCY) == three_gaussian_logpdf(
            center, center - d, FREQUENCY
        )

    @pytest.mark.parametrize(
        "params",
        [
            FREQUENCY,
            ThreeGaussianParams(sigma1=0.02, sigma2=0.05, mu=1.0, weight_center=0.3),
            ThreeGaussianParams(sigma1=2.0, sigma2=0.54, mu=1.0, weight_center=0.0),
            ThreeGaussianParams(sigma1=0.15, sigma2=2.0, mu=1.0, weight_center=1.0),
        ],
    )
    def test_integrates_to_one(self, params):
        center = 0.5
        half = params.mu + 10 * max(params.sigma1, params.sigma2)
        total, _ = integrate.quad(
            lambda x: np.exp(three_gaussian_logpdf(center, x, params)),
            center - half,
            center + half,
            points=[center - params.mu, center, center + params.mu],
            limit=400,
            epsabs=1e-12,
            epsrel=1e-12,
        )
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_endpoint_weight_side_modes_only(self):
        params = ThreeGaussianParams(sigma1=1.0, sigma2=0.1, mu=5.0, weight_center=0.0)
        value = three_gaussian_logpdf(0.0, 5.0, params)
        assert np.isfinite(value)
        assert value == pytest.approx(np.log(0.5) + norm.logpdf(0.0, 0.0, 0.1))

    def test_never_nan_far_from_center(self):
        values = three_gaussian_logpdf(0.0, np.array([1e3, -1e4, 1e6]), FREQUENCY)
        assert not np.any(np.isnan(values))

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            ThreeGaussianParams(sigma1=-1.0, sigma2=1.0, mu=0.0, weight_center=0.5)
        with pytest.raises(ValueError):
            ThreeGaussianParams(sigma1=1.0, sigma2=1.0, mu=0.0, weight_center=1.5)


class TestThreeGaussianSample:
    def test_central_only_variance(self, rng):
        params = ThreeGaussianParams(sigma1=0.7, sigma2=0.1, mu=3.0, weight_center=1.0)
        draws = three_gaussian_sample(rng, 0.0, params, size=100_000)
        assert np.var(draws) == pytest.approx(0.49, rel=0.02)
        assert np.max(np.abs(draws)) < 6 * 0.7

    def test_side_only_avoids_center(self, rng):
        params = ThreeGaussianParams(sigma1=1.0, sigma2=0.1, mu=5.0, weight_center=0.0)
        draws = three_gaussian_sample(rng, 0.0, params, size=100_000)
        assert not np.any(np.abs(draws) < 4.0)

    def test_deterministic_given_seed(self):
        a = three_gaussian_sample(np.random.default_rng(3), 1.0, FREQUENCY, size=50)
        b = three_gaussian_sample(np.random.default_rng(3), 1.0, FREQUENCY, size=50)
        assert np.array_equal(a, b)

    def test_scalar_center_gives_float(self, rng):
        assert isinstance(three_gaussian_sample(rng, 0.0, FREQUENCY), float)

    @pytest.mark.slow
    def test_mixture_moments(self, rng):
        params = ThreeGaussianParams(sigma1=0.45, sigma2=0.2, mu=1.25, weight_center=0.6)
        center = 2.0
        n = 1_000_000
        draws = three_gaussian_sample(rng, center, params, size=n)
        expected_var = (
            params.weight_center * params.sigma1**2
            + (1 - params.weight_center) * (params.sigma2**2 + params.mu**2)
        )
        assert abs(draws.mean() - center) < 4 * np.sqrt(expected_var / n)
        squares = (draws - center) ** 2
        assert abs(squares.mean() - expected_var) < 4 * squares.std() / np.sqrt(n)


class TestCentralTracker:
    def test_single_push(self):
        tracker = central_push(CentralTracker(2), [1.5, -2.0])
        assert_allclose(tracker.running_mean, [1.5, -2.0])
        assert tracker.count == 1

    def test_mean_of_sequence(self):
        tracker = CentralTracker(1)
        for value in (1.0, 2.0, 3.0):
            tracker = central_push(tracker, [value])
        assert tracker.running_mean[0] == pytest.approx(2.0)

    def test_central_push_leaves_input_untouched(self):
        tracker = CentralTracker(1).push([4.0])
        pushed = central_push(tracker, [8.0])
        assert tracker.count == 1
        assert pushed.count == 2
        assert tracker.running_mean[0] == 4.0

    def test_matches_batch_mean(self, rng):
        values = rng.normal(3.0, 10.0, size=(10_000, 3))
        tracker = CentralTracker(3)
        for value in values:
            tracker.push(value)
        assert_allclose(tracker.running_mean, values.mean(axis=0), rtol=1e-12)

    def test_permutation_invariant(self, rng):
        values = rng.lognormal(0.0, 3.0, size=(2_000, 1))
        forward, shuffled = CentralTracker(1), CentralTracker(1)
        for value in values:
            forward.push(value)
        for value in rng.permutation(values):
            shuffled.push(value)
        assert_allclose(forward.running_mean, shuffled.running_mean, rtol=1e-12)

    def test_empty_mean_undefined(self):
        with pytest.raises(ValueError):
            CentralTracker(1).running_mean

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            CentralTracker(2).push([1.0])


class TestStageProposals:
    @pytest.mark.parametrize("stage", [1, 2, 5])
    def test_single_gaussian_standard_normal(self, stage):
        spec = ProposalSpec.single_gaussian(1.0)
        assert dr_proposal_logpdf(stage, [0.0], [0.0], spec) == pytest.approx(-0.91894, abs=1e-5)

    def test_stage_weight_substitution(self):
        spec = ProposalSpec.three_gaussian(0.45, 0.2, 1.25, 0.15, 0.95)
        dim = spec.dimensions[0]
        anchor, candidate = [0.3], [1.4]
        assert dr_proposal_logpdf(1, anchor, candidate, spec) == pytest.approx(
            three_gaussian_logpdf(0.3, 1.4, dim.q_a), rel=1e-14
        )
        assert dr_proposal_logpdf(2, anchor, candidate, spec) == pytest.approx(
            three_gaussian_logpdf(0.3, 1.4, dim.q_b), rel=1e-14
        )
        assert dim.q_a.model_copy(update={"weight_center": dim.nb}) == dim.q_b

    def test_product_over_dimensions(self):
        first = ThreeGaussianDimension(sigma1=0.45, sigma2=0.2, mu=1.25, na=0.15, nb=0.95)
        spec = ProposalSpec(dimensions=(first, *ProposalSpec.single_gaussian(0.3).dimensions))
        anchor, candidate = np.array([0.1, -0.2]), np.array([1.3, 0.05])
        for stage in (1, 3):
            joint = dr_proposal_logpdf(stage, anchor, candidate, spec)
            separate = dr_proposal_logpdf(
                stage, anchor[:1], candidate[:1], ProposalSpec(dimensions=(first,))
            ) + dr_proposal_logpdf(
                stage, anchor[1:], candidate[1:], ProposalSpec.single_gaussian(0.3)
            )
            assert abs(joint - separate) < 1e-14

    def test_dimension_mismatch(self):
        spec = ProposalSpec.single_gaussian(1.0, 1.0)
        with pytest.raises(DimensionMismatchError):
            dr_proposal_logpdf(1, [0.0], [0.0, 1.0], spec)
        with pytest.raises(DimensionMismatchError):
            dr_proposal_sample(np.random.default_rng(0), 1, [0.0], spec)

    def test_stage_zero_rejected(self):
        with pytest.raises(ValueError):
            dr_proposal_logpdf(0, [0.0], [0.0], ProposalSpec.single_gaussian(1.0))

    def test_forced_big_jump(self, rng):
        spec = ProposalSpec.three_gaussian(0.45, 0.2, 1.25, 0.0, 0.95)
        anchor = np.array([2.0])
        jumps = np.array([dr_proposal_sample(rng, 1, anchor, spec)[0] for _ in range(2_000)])
        distance = np.abs(jumps - anchor[0])
        assert np.all(np.abs(distance - 1.25) < 6 * 0.2)

    def test_forced_small_step(self, rng):
        spec = ProposalSpec.three_gaussian(0.45, 0.2, 1.25, 0.15, 1.0)
        anchor = np.array([-1.0])
        steps = np.array([dr_proposal_sample(rng, 3, anchor, spec)[0] for _ in range(2_000)])
        assert np.all(np.abs(steps - anchor[0]) < 6 * 0.45)

    def test_sampler_matches_density(self, rng):
        spec = ProposalSpec.three_gaussian(0.45, 0.2, 1.25, 0.4, 0.95)
        proposal_draws = np.array(
            [dr_proposal_sample(rng, 1, np.zeros(1), spec)[0] for _ in range(2_000)]
        )
        bulk = three_gaussian_sample(rng, 0.0, spec.dimensions[0].q_a, size=100_000)
        q_a = spec.dimensions[0].q_a
        assert stats.kstest(bulk, lambda x: mixture_cdf(x, 0.0, q_a)).pvalue > 1e-3
        assert stats.kstest(proposal_draws, lambda x: mixture_cdf(x, 0.0, q_a)).pvalue > 1e-3


def test_gaussian_proposal_requires_positive_widths():
    with pytest.raises(ValueError):
        GaussianProposal([1.0, 0.0])


def test_gaussian_proposal_matches_normal(rng):
    proposal = GaussianProposal([2.4])
    assert proposal.logpdf([0.0], [1.0]) == pytest.approx(norm.logpdf(1.0, 0.0, 2.4))
    draws = np.array([proposal.sample(rng, [0.0])[0] for _ in range(20_000)])
    assert stats.kstest(draws, norm(0.0, 2.4).cdf).pvalue > 1e-3
