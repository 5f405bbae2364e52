"""
Tests for proposal-loss calibration: closed forms, Monte Carlo and grids.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from src.analysis.calibration import (
    analytic_ap_loss,
    analytic_cpe_shift,
    ap_validity_rms,
    logratio_density_reweighted,
    logratio_density_same,
    logratio_density_shifted,
    loss_grid,
    mc_ap_loss,
    mc_cpe_loss,
    mean_reweighted,
    mean_same,
    mean_shifted,
    recommend_parameters,
)
from src.models import (
    CalibrationConfig,
    LossGrid,
    LossKind,
    TargetStructure,
)
from src.models.calibration_models import NA_AXIS, NB_AXIS, NDR_AXIS, S1_AXIS, S2_AXIS
from src.models.errors import DivergentLossError, InfeasibleRecommendationError
from src.sampling.proposal import LOG_SQRT_2PI
from src.utils.grid_cache import GridCache

WEIGHTS = tuple(round(0.05 * i, 2) for i in range(1, 20))


def peaks(m, sigma1, sigma2):
    central = math.log(m) - LOG_SQRT_2PI - math.log(sigma1)
    side = math.log(1.0 - m) - LOG_SQRT_2PI - math.log(2.0 * sigma2)
    return sorted((central, side))


def integrate(density, m, sigma1, sigma2, moment=0):
    """Integral of L**moment * density(L), split at the integrable peak singularities."""
    low, high = peaks(m, sigma1, sigma2)
    total = 0.0
    for a, b in ((high - 80.0, low), (low, high)):
        value, _ = quad(lambda f: f**moment * density(f), a, b, limit=200)
        total += value
    return total


class TestClosedForms:
    def test_reference_ap_loss(self):
        assert analytic_ap_loss(0.15, 0.95) == pytest.approx(-3.743232, abs=1e-6)

    def test_ap_loss_is_quadratic_near_equal_weights(self):
        eps = 1e-3
        assert analytic_ap_loss(0.5, 0.5) == 0.0
        assert analytic_ap_loss(0.5, 0.5 + eps) == pytest.approx(-(eps**2) / 0.25, rel=1e-2)

    def test_ap_loss_is_symmetric_and_non_positive(self):
        for na in WEIGHTS:
            for nb in WEIGHTS:
                loss = analytic_ap_loss(na, nb)
                assert loss <= 0.0
                assert loss == pytest.approx(analytic_ap_loss(nb, na), rel=1e-12)

    @pytest.mark.parametrize("na,nb", [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0)])
    def test_ap_loss_diverges_at_endpoints(self, na, nb):
        with pytest.raises(DivergentLossError):
            analytic_ap_loss(na, nb)

    def test_reference_cpe_shift(self):
        assert analytic_cpe_shift(0.1, 0.95, 0.45, 0.2) == pytest.approx(-0.029706, abs=1e-6)

    def test_cpe_shift_scaling(self):
        assert analytic_cpe_shift(0.0, 0.95, 0.45, 0.2) == 0.0
        one = analytic_cpe_shift(0.1, 0.7, 0.3, 0.1)
        assert analytic_cpe_shift(0.2, 0.7, 0.3, 0.1) == pytest.approx(4 * one, rel=1e-12)
        assert analytic_cpe_shift(-0.1, 0.7, 0.3, 0.1) == pytest.approx(one, rel=1e-12)

    def test_cpe_shift_rejects_bad_widths(self):
        with pytest.raises(ValueError):
            analytic_cpe_shift(0.1, 0.5, 0.0, 0.2)

    def test_reference_mean(self):
        assert mean_same(1.0, 1.0, 1.0) == pytest.approx(-1.41894, abs=1e-5)

    def test_ap_loss_composes_from_means(self, rng):
        for _ in range(1_000):
            na, nb = rng.uniform(0.01, 0.99, size=2)
            s1, s2 = np.exp(rng.uniform(-3, 1, size=2))
            composed = (mean_reweighted(na, nb, s1, s2) - mean_same(na, s1, s2)) + (
                mean_reweighted(nb, na, s1, s2) - mean_same(nb, s1, s2)
            )
            assert composed == pytest.approx(analytic_ap_loss(na, nb), abs=1e-12, rel=1e-12)

    def test_shifted_minus_same_is_cpe_shift(self, rng):
        for _ in range(100):
            delta = rng.normal()
            n = rng.uniform(0.01, 0.99)
            s1, s2 = np.exp(rng.uniform(-3, 1, size=2))
            difference = mean_shifted(delta, n, s1, s2) - mean_same(n, s1, s2)
            assert difference == pytest.approx(
                analytic_cpe_shift(delta, n, s1, s2), abs=1e-12, rel=1e-12
            )

    def test_mean_handles_endpoint_weights(self):
        assert math.isfinite(mean_reweighted(1.0, 1.0, 0.5, 0.5))
        assert math.isfinite(mean_reweighted(0.0, 0.0, 0.5, 0.5))
        with pytest.raises(ValueError):
            mean_reweighted(1.2, 0.5, 0.5, 0.5)


class TestLogRatioDensities:
    @pytest.mark.parametrize("n,sigma1,sigma2", [(0.95, 0.45, 0.2), (0.3, 0.15, 0.04)])
    def test_same_density_normalized_with_matching_mean(self, n, sigma1, sigma2):
        density = lambda f: logratio_density_same(f, n, sigma1, sigma2)  # noqa: E731
        assert integrate(density, n, sigma1, sigma2) == pytest.approx(1.0, abs=1e-6)
        assert integrate(density, n, sigma1, sigma2, moment=1) == pytest.approx(
            mean_same(n, sigma1, sigma2), abs=1e-5
        )

    def test_reweighted_density(self):
        n, m, sigma1, sigma2 = 0.15, 0.95, 0.45, 0.2
        density = lambda f: logratio_density_reweighted(f, n, m, sigma1, sigma2)  # noqa: E731
        assert integrate(density, m, sigma1, sigma2) == pytest.approx(1.0, abs=1e-6)
        assert integrate(density, m, sigma1, sigma2, moment=1) == pytest.approx(
            mean_reweighted(n, m, sigma1, sigma2), abs=1e-5
        )

    def test_shifted_density(self):
        delta, n, sigma1, sigma2 = 0.1, 0.95, 0.45, 0.2
        density = lambda f: logratio_density_shifted(f, delta, n, sigma1, sigma2)  # noqa: E731
        assert integrate(density, n, sigma1, sigma2) == pytest.approx(1.0, abs=1e-6)
        assert integrate(density, n, sigma1, sigma2, moment=1) == pytest.approx(
            mean_shifted(delta, n, sigma1, sigma2), abs=1e-5
        )

    def test_zero_above_highest_peak(self):
        top = max(peaks(0.95, 0.45, 0.2))
        assert logratio_density_same(top + 0.1, 0.95, 0.45, 0.2) == 0.0
        values = logratio_density_same(np.array([top - 1.0, top + 1.0]), 0.95, 0.45, 0.2)
        assert values[0] > 0.0 and values[1] == 0.0

    def test_scalar_in_scalar_out(self):
        assert isinstance(logratio_density_same(-2.0, 0.5, 0.3, 0.1), float)

    def test_rejects_bad_weights(self):
        with pytest.raises(ValueError):
            logratio_density_reweighted(-1.0, 0.5, 1.5, 0.3, 0.1)


class TestMonteCarlo:
    @pytest.mark.parametrize("na,nb", [(0.15, 0.95), (0.3, 0.6)])
    def test_ap_loss_matches_closed_form_when_separated(self, rng, na, nb):
        mean, stderr = mc_ap_loss(rng, 0.15, 0.04, na, nb, 50_000)
        assert abs(mean - analytic_ap_loss(na, nb)) < 4 * stderr + 2e-3

    def test_ap_loss_is_reproducible(self):
        first = mc_ap_loss(np.random.default_rng(5), 0.45, 0.2, 0.15, 0.95, 10_000)
        second = mc_ap_loss(np.random.default_rng(5), 0.45, 0.2, 0.15, 0.95, 10_000)
        assert first == second

    def test_uneven_batches(self, rng):
        _, stderr = mc_ap_loss(rng, 0.45, 0.2, 0.15, 0.95, 10_001, batch_size=999)
        assert stderr > 0

    def test_longer_excursions(self, rng):
        mean, stderr = mc_ap_loss(rng, 0.45, 0.2, 0.15, 0.95, 10_000, excursion_length=5)
        assert math.isfinite(mean) and stderr > 0

    def test_cpe_loss_vanishes_for_three_stages(self, rng):
        mean, stderr = mc_cpe_loss(rng, 0.45, 0.2, 0.95, 3, 10_000)
        assert mean == 0.0
        assert stderr == 0.0

    def test_cpe_loss_longer_excursion(self, rng):
        mean, stderr = mc_cpe_loss(rng, 0.45, 0.2, 0.7, 10, 20_000, batch_size=3_000)
        assert math.isfinite(mean)
        assert stderr > 0

    @pytest.mark.parametrize(
        "call",
        [
            lambda rng: mc_ap_loss(rng, 0.45, 0.2, 0.15, 0.95, 9_999),
            lambda rng: mc_ap_loss(rng, 0.45, 0.2, 0.15, 0.95, 10_000, excursion_length=1),
            lambda rng: mc_cpe_loss(rng, 0.45, 0.2, 0.95, 2, 10_000),
        ],
    )
    def test_argument_checks(self, rng, call):
        with pytest.raises(ValueError):
            call(rng)

    @pytest.mark.slow
    def test_validity_rms_is_small_when_separated(self, rng):
        rms = ap_validity_rms(rng, 0.15, 0.04, (0.15, 0.5, 0.85), (0.15, 0.5, 0.85), 100_000)
        assert rms < 0.02


def ap_config(**overrides):
    fields = dict(
        kind=LossKind.AP,
        s1_over_mu=(0.15,),
        s2_over_mu=(0.04,),
        na=(0.15, 0.5),
        nb=(0.5, 0.95),
        n_samples=10_000,
        seed=11,
    )
    fields.update(overrides)
    return CalibrationConfig(**fields)


class TestLossGrid:
    def test_shape_and_axes(self):
        grid = loss_grid(ap_config())
        assert grid.kind == LossKind.AP
        assert grid.axis_names == (S1_AXIS, S2_AXIS, NA_AXIS, NB_AXIS)
        assert grid.values.shape == (1, 1, 2, 2)
        assert np.all(grid.stderr > 0)
        assert grid.mc_samples == 10_000

    def test_cache_rerun_hits_every_cell(self, tmp_path):
        first_cache = GridCache(tmp_path)
        first = loss_grid(ap_config(), cache=first_cache)
        assert first_cache.stats == {"hits": 0, "misses": 4}

        second_cache = GridCache(tmp_path)
        second = loss_grid(ap_config(), cache=second_cache)
        assert second_cache.stats == {"hits": 4, "misses": 0}
        np.testing.assert_array_equal(first.values, second.values)
        np.testing.assert_array_equal(first.stderr, second.stderr)

    def test_cells_do_not_depend_on_grid_layout(self):
        full = loss_grid(ap_config())
        single = loss_grid(ap_config(na=(0.5,), nb=(0.95,)))
        assert single.values[0, 0, 0, 0] == full.values[0, 0, 1, 1]

    def test_seed_changes_values(self):
        first = loss_grid(ap_config())
        second = loss_grid(ap_config(seed=12))
        assert not np.array_equal(first.values, second.values)

    def test_worker_processes_match_in_process(self):
        serial = loss_grid(ap_config())
        parallel = loss_grid(ap_config(), threads=2)
        np.testing.assert_array_equal(serial.values, parallel.values)

    def test_cpe_grid(self):
        config = CalibrationConfig(
            kind=LossKind.CPE,
            s1_over_mu=(0.45,),
            s2_over_mu=(0.2,),
            nb=(0.95,),
            n_dr=(3, 5),
            n_samples=10_000,
        )
        grid = loss_grid(config)
        assert grid.values.shape == (1, 1, 1, 2)
        assert grid.values[0, 0, 0, 0] == 0.0

    def test_progress(self):
        calls = []
        loss_grid(ap_config(), progress=lambda done, total: calls.append((done, total)))
        assert calls[-1] == (4, 4)

    def test_frame_round_trip(self):
        grid = loss_grid(ap_config())
        frame = grid.to_frame()
        assert list(frame.columns) == [S1_AXIS, S2_AXIS, NA_AXIS, NB_AXIS, "value", "stderr"]
        restored = LossGrid.from_frame(frame.sample(frac=1.0, random_state=1), LossKind.AP, 10_000)
        np.testing.assert_array_equal(restored.values, grid.values)
        with pytest.raises(ValueError):
            LossGrid.from_frame(frame.iloc[1:], LossKind.AP, 10_000)

    def test_positivity_violations(self):
        grid = LossGrid(
            kind=LossKind.AP,
            axes={S1_AXIS: (1.0,), S2_AXIS: (1.0,), NA_AXIS: (0.2, 0.4), NB_AXIS: (0.5,)},
            values=np.array([0.1, -1.0]).reshape(1, 1, 2, 1),
            stderr=np.full((1, 1, 2, 1), 0.01),
            mc_samples=10_000,
        )
        assert grid.positivity_violations() == 1

    def test_config_rejects_weights_on_the_boundary(self):
        with pytest.raises(ValueError):
            ap_config(na=(0.0, 0.5))
        with pytest.raises(ValueError):
            ap_config(n_samples=100)


def synthetic_grids():
    sigmas = (0.15, 0.54)
    n_drs = (3, 100, 500)
    ap_values = np.array([[analytic_ap_loss(na, nb) for nb in WEIGHTS] for na in WEIGHTS])
    ap = LossGrid(
        kind=LossKind.AP,
        axes={S1_AXIS: sigmas, S2_AXIS: sigmas, NA_AXIS: WEIGHTS, NB_AXIS: WEIGHTS},
        values=np.broadcast_to(ap_values, (2, 2) + ap_values.shape).copy(),
        stderr=np.zeros((2, 2, len(WEIGHTS), len(WEIGHTS))),
        mc_samples=10_000,
    )
    # Worst case at the longest excursion: -10 (1 - nb)
    cpe_values = np.array([[-10.0 * (1.0 - nb) * n / 500.0 for n in n_drs] for nb in WEIGHTS])
    cpe = LossGrid(
        kind=LossKind.CPE,
        axes={S1_AXIS: sigmas, S2_AXIS: sigmas, NB_AXIS: WEIGHTS, NDR_AXIS: n_drs},
        values=np.broadcast_to(cpe_values, (2, 2) + cpe_values.shape).copy(),
        stderr=np.zeros((2, 2, len(WEIGHTS), len(n_drs))),
        mc_samples=10_000,
    )
    return ap, cpe


class TestRecommendation:
    structure = TargetStructure(mode_spacing=1.0, mode_widths=(0.16, 0.14))

    def test_recommendation(self):
        ap, cpe = synthetic_grids()
        rec = recommend_parameters(self.structure, -2.0, -2.0, ap, cpe)
        assert rec.grid_cell == (0.15, 0.15)
        assert rec.nb == pytest.approx(0.8, abs=2e-3)
        assert 0.15 < rec.na < 0.2
        assert rec.expected_ap_loss >= -2.0
        assert rec.expected_cpe_loss >= -2.0
        assert rec.n_dr == 500
        assert (rec.mu, rec.sigma1, rec.sigma2) == (1.0, 0.16, 0.14)

    def test_explicit_n_dr_passes_through(self):
        ap, cpe = synthetic_grids()
        assert recommend_parameters(self.structure, -2.0, -2.0, ap, cpe, n_dr=40).n_dr == 40

    def test_unbounded_tolerances_give_grid_minima(self):
        ap, cpe = synthetic_grids()
        rec = recommend_parameters(self.structure, -math.inf, -math.inf, ap, cpe)
        assert rec.na == pytest.approx(min(WEIGHTS))
        assert rec.nb == pytest.approx(min(WEIGHTS))

    def test_tighter_tolerance_needs_larger_weight(self):
        ap, cpe = synthetic_grids()
        recommended = [
            recommend_parameters(self.structure, tol, -2.0, ap, cpe).na
            for tol in (-4.0, -2.0, -1.0)
        ]
        assert recommended == sorted(recommended)

    def test_infeasible_cpe_tolerance(self):
        ap, cpe = synthetic_grids()
        with pytest.raises(InfeasibleRecommendationError) as excinfo:
            recommend_parameters(self.structure, -2.0, 0.5, ap, cpe)
        assert excinfo.value.report["step"] == "cpe"
        assert excinfo.value.report["grid_cell"] == [0.15, 0.15]

    def test_infeasible_ap_tolerance(self):
        ap, cpe = synthetic_grids()
        with pytest.raises(InfeasibleRecommendationError) as excinfo:
            recommend_parameters(self.structure, 0.1, -2.0, ap, cpe)
        assert excinfo.value.report["step"] == "ap"
