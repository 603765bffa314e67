import math

import numpy as np
import pytest
from scipy.special import gammaln

from app.modules.common.errors import DensityError, OptimizerError, QuadratureError
from app.modules.densities.service import IidShapeDensity, UniformDensity, make_symmetric_pair
from app.modules.densities.shapes import (
    cauchy_base,
    concave_shape,
    convex_shape,
    exponential_base,
    half_normal_base,
    normal_base,
)
from app.modules.statistics import mle
from app.modules.statistics.mle import ProfileFit
from app.modules.statistics.quadrature import LogIntegral, integrate_log_batch
from app.modules.statistics.schemas import QuadratureSpec
from app.modules.statistics.service import (
    StatisticKind,
    TestStatistic,
    avg_lr,
    avg_lr_statistic,
    evaluate_point,
    family_statistic,
    integrated_lr_location,
    integrated_lr_scale,
    location_integrals,
    max_lr,
    max_lr_location,
    max_lr_scale,
    max_lr_statistic,
    mle_location,
    mle_scale,
    scale_integrals,
)


@pytest.fixture
def convex_pair():
    return make_symmetric_pair(convex_shape(), 1)


@pytest.mark.unit
class TestSimpleStatistics:
    def test_values_at_the_midpoint(self, convex_pair):
        stat_max = max_lr_statistic(convex_pair.null, convex_pair.alternatives)
        stat_avg = avg_lr_statistic(convex_pair.null, convex_pair.alternatives)
        assert max_lr([0.5], stat_max) == pytest.approx(math.log(0.75))
        assert avg_lr([0.5], stat_avg) == pytest.approx(math.log(0.75))

    def test_values_off_center(self, convex_pair):
        stat_max = max_lr_statistic(convex_pair.null, convex_pair.alternatives)
        stat_avg = avg_lr_statistic(convex_pair.null, convex_pair.alternatives)
        # f(0.2) = 0.12 and g(0.2) = f(0.8) = 1.92
        assert max_lr([0.2], stat_max) == pytest.approx(math.log(1.92))
        assert avg_lr([0.2], stat_avg) == pytest.approx(math.log(1.02))

    def test_weights_shift_the_average(self, convex_pair):
        stat = avg_lr_statistic(convex_pair.null, convex_pair.alternatives, weights=[0.75, 0.25])
        assert avg_lr([0.2], stat) == pytest.approx(math.log(0.75 * 0.12 + 0.25 * 1.92))

    def test_vanishing_alternative_gives_minus_infinity(self):
        stat = max_lr_statistic(UniformDensity(1), [IidShapeDensity(convex_shape(), 1)])
        assert max_lr([0.0], stat) == -np.inf

    def test_worked_values(self, convex_pair):
        convex_max = max_lr_statistic(convex_pair.null, convex_pair.alternatives)
        convex_avg = avg_lr_statistic(convex_pair.null, convex_pair.alternatives)
        concave = make_symmetric_pair(concave_shape(), 1)
        concave_avg = avg_lr_statistic(concave.null, concave.alternatives)
        assert max_lr([0.9], convex_max) == pytest.approx(0.887891, abs=1e-6)
        assert avg_lr([0.5], convex_avg) == pytest.approx(-0.287682, abs=1e-6)
        assert avg_lr([0.5], concave_avg) == pytest.approx(0.0588915, abs=1e-7)

    def test_degenerate_points_are_flagged(self):
        vanishing = IidShapeDensity(convex_shape(), 1)
        both_vanish = evaluate_point(max_lr_statistic(vanishing, [vanishing]), [0.0])
        assert both_vanish.value == -np.inf
        assert both_vanish.degenerate
        alternative_vanishes = evaluate_point(max_lr_statistic(UniformDensity(1), [vanishing]), [0.0])
        assert alternative_vanishes.value == -np.inf
        assert not alternative_vanishes.degenerate

    def test_point_must_match_the_sample_space(self, convex_pair):
        stat_max = max_lr_statistic(convex_pair.null, convex_pair.alternatives)
        stat_avg = avg_lr_statistic(convex_pair.null, convex_pair.alternatives)
        with pytest.raises(DensityError):
            max_lr([0.2, 0.3], stat_max)
        with pytest.raises(DensityError):
            avg_lr([np.nan], stat_avg)
        with pytest.raises(DensityError):
            max_lr([[0.2]], stat_max)

    def test_family_statistics_have_no_point_form(self):
        with pytest.raises(DensityError):
            evaluate_point(family_statistic(StatisticKind.INT_LOCATION_LR, normal_base(), cauchy_base()), [0.0, 1.0])

    def test_max_dominates_average(self, rng):
        pair = make_symmetric_pair(concave_shape(), 4)
        points = rng.random((200, 4))
        values_max = max_lr_statistic(pair.null, pair.alternatives).evaluate(points).values
        values_avg = avg_lr_statistic(pair.null, pair.alternatives).evaluate(points).values
        assert np.all(values_max >= values_avg - 1e-12)
        assert np.all(values_avg >= values_max - math.log(2) - 1e-12)

    def test_wrong_kind_is_rejected(self, convex_pair):
        stat = avg_lr_statistic(convex_pair.null, convex_pair.alternatives)
        with pytest.raises(DensityError):
            max_lr([0.5], stat)

    def test_weights_must_match_alternatives(self, convex_pair):
        with pytest.raises(DensityError):
            avg_lr_statistic(convex_pair.null, convex_pair.alternatives, weights=[1.0])
        with pytest.raises(DensityError):
            TestStatistic(StatisticKind.MAX_LR, null_density=convex_pair.null, alternatives=convex_pair.alternatives, weights=(0.5, 0.5))

    def test_family_statistic_needs_both_bases(self):
        with pytest.raises(DensityError):
            TestStatistic(StatisticKind.INT_LOCATION_LR, f_base=normal_base())

    def test_describe(self, convex_pair):
        descriptor = avg_lr_statistic(convex_pair.null, convex_pair.alternatives).describe()
        assert descriptor.identifier == "avg-lr"
        assert descriptor.weights == [0.5, 0.5]
        assert descriptor.alternatives == ["convex-3x2", "convex-3x2-reflected"]


def _normal_closed_form(points):
    n = points.shape[1]
    spread = np.sum((points - points.mean(axis=1, keepdims=True)) ** 2, axis=1)
    return -0.5 * (n - 1) * np.log(2 * np.pi) - 0.5 * np.log(n) - spread / 2.0


@pytest.mark.unit
class TestQuadrature:
    def test_gaussian_location_integral(self, rng):
        points = rng.normal(scale=2.0, size=(50, 3))
        result = location_integrals(points, normal_base(), QuadratureSpec())
        assert not result.failed.any()
        np.testing.assert_allclose(result.log_value, _normal_closed_form(points), rtol=0, atol=1e-8)

    def test_exponential_scale_integral(self, rng):
        points = rng.exponential(size=(50, 3))
        quad = QuadratureSpec(transform="log-atan")
        result = scale_integrals(points, exponential_base(), quad)
        expected = gammaln(3) - 3 * np.log(points.sum(axis=1))
        np.testing.assert_allclose(result.log_value, expected, rtol=0, atol=1e-8)

    def test_half_normal_scale_integral(self, rng):
        points = rng.exponential(size=(20, 4))
        quad = QuadratureSpec(transform="log-atan")
        result = scale_integrals(points, half_normal_base(), quad)
        q = np.sum(points**2, axis=1)
        expected = 2 * np.log(2 / np.pi) + np.log(0.5) + gammaln(2) + 2 * np.log(2 / q)
        np.testing.assert_allclose(result.log_value, expected, rtol=0, atol=1e-8)

    def test_converged_row_is_not_flagged(self):
        points = np.array([[0.0, 1.0]])
        result = location_integrals(points, normal_base(), QuadratureSpec())
        assert not result.failed[0]
        assert math.exp(result.log_value[0]) == pytest.approx(0.2196956, rel=1e-6)
        single = integrate_log_batch(lambda pts, z: -0.5 * z**2, np.zeros((1, 1)), np.zeros(1), QuadratureSpec())
        assert not single.failed[0]
        assert single.log_value[0] == pytest.approx(0.5 * math.log(2 * math.pi), abs=1e-10)

    def test_scale_denominators_at_unit_data(self):
        quad = QuadratureSpec(transform="log-atan")
        points = np.array([[1.0, 1.0]])
        exponential = scale_integrals(points, exponential_base(), quad)
        half_normal = scale_integrals(points, half_normal_base(), quad)
        assert math.exp(exponential.log_value[0]) == pytest.approx(0.25, rel=1e-9)
        assert math.exp(half_normal.log_value[0]) == pytest.approx(1 / math.pi, rel=1e-9)

    def test_finite_bounds(self):
        points = np.zeros((1, 1))
        result = integrate_log_batch(
            lambda pts, z: np.zeros_like(z), points, np.zeros(1), QuadratureSpec(transform="identity"), bounds=(0.0, 2.0)
        )
        assert result.log_value[0] == pytest.approx(math.log(2.0), abs=1e-12)

    def test_finite_bounds_need_identity_transform(self):
        with pytest.raises(ValueError):
            integrate_log_batch(lambda pts, z: z, np.zeros((1, 1)), np.zeros(1), QuadratureSpec(), bounds=(0.0, 1.0))


@pytest.mark.unit
class TestIntegratedStatistics:
    def test_same_family_gives_zero(self):
        assert integrated_lr_location([0.3, -1.2, 2.0], normal_base(), normal_base()) == pytest.approx(0.0, abs=1e-10)

    def test_translation_invariance(self):
        x = np.array([0.3, -1.2, 2.0])
        base = integrated_lr_location(x, normal_base(), cauchy_base())
        shifted = integrated_lr_location(x + 7.25, normal_base(), cauchy_base())
        assert shifted == pytest.approx(base, abs=1e-8)

    def test_scale_invariance(self):
        x = np.array([0.4, 1.1, 2.7])
        base = integrated_lr_scale(x, exponential_base(), half_normal_base())
        scaled = integrated_lr_scale(3.5 * x, exponential_base(), half_normal_base())
        assert scaled == pytest.approx(base, abs=1e-8)

    def test_scale_value_at_unit_data(self):
        value = integrated_lr_scale([1.0, 1.0], exponential_base(), half_normal_base())
        assert value == pytest.approx(math.log(4 / math.pi), abs=1e-9)

    def test_non_finite_data_is_rejected(self):
        with pytest.raises(DensityError):
            integrated_lr_location([0.1, np.nan], normal_base(), cauchy_base())
        with pytest.raises(DensityError):
            max_lr_location([[0.1, 0.2]], normal_base(), cauchy_base())

    def test_scale_needs_positive_data(self):
        with pytest.raises(DensityError):
            integrated_lr_scale([1.0, -0.5], exponential_base(), half_normal_base())

    def test_quadrature_failure_is_reported(self, mocker):
        failed = LogIntegral(log_value=np.array([0.1]), rel_error=np.array([0.5]), failed=np.array([True]))
        mocker.patch("app.modules.statistics.service.location_integrals", return_value=failed)
        with pytest.raises(QuadratureError) as excinfo:
            integrated_lr_location([0.0, 1.0], normal_base(), cauchy_base())
        assert excinfo.value.error_bound == pytest.approx(0.5)

    def test_batch_matches_single_point(self, rng):
        points = rng.normal(size=(5, 3))
        stat = family_statistic(StatisticKind.INT_LOCATION_LR, normal_base(), cauchy_base())
        batch = stat.evaluate(points).values
        singles = [integrated_lr_location(row, normal_base(), cauchy_base()) for row in points]
        np.testing.assert_allclose(batch, singles, rtol=0, atol=1e-9)


@pytest.mark.unit
class TestMaximumLikelihood:
    def test_normal_location_mle_is_the_mean(self):
        x = np.array([0.3, -1.2, 2.0, 0.8])
        assert mle_location(x, normal_base()) == pytest.approx(x.mean(), abs=1e-7)

    def test_single_observation(self):
        assert mle_location([1.7], cauchy_base()) == 1.7

    def test_exponential_scale_mle_is_the_mean(self):
        x = np.array([0.4, 1.1, 2.7])
        assert mle_scale(x, exponential_base()) == pytest.approx(x.mean(), rel=1e-7)

    def test_half_normal_scale_mle(self):
        x = np.array([0.4, 1.1, 2.7])
        assert mle_scale(x, half_normal_base()) == pytest.approx(np.sqrt(np.mean(x**2)), rel=1e-7)

    def test_cauchy_location_mle_is_a_stationary_point(self):
        x = np.array([-3.0, 0.1, 0.4, 6.0])
        theta = mle_location(x, cauchy_base())
        gradient = np.sum(2 * (x - theta) / (1 + (x - theta) ** 2))
        assert abs(gradient) < 1e-5

    def test_max_lr_location_same_family_is_zero(self):
        assert max_lr_location([0.3, -1.2, 2.0], normal_base(), normal_base()) == pytest.approx(0.0, abs=1e-12)

    def test_max_lr_scale_is_scale_invariant(self):
        x = np.array([0.4, 1.1, 2.7])
        base = max_lr_scale(x, exponential_base(), half_normal_base())
        assert max_lr_scale(0.01 * x, exponential_base(), half_normal_base()) == pytest.approx(base, abs=1e-8)

    def test_unconverged_search_raises(self, mocker):
        fit = ProfileFit(argmax=np.array([0.2]), value=np.array([-1.0]), gradient=np.array([0.3]), converged=np.array([False]))
        mocker.patch("app.modules.statistics.service.fit_location", return_value=fit)
        with pytest.raises(OptimizerError) as excinfo:
            mle_location([0.0, 1.0], normal_base())
        assert excinfo.value.best_iterate == pytest.approx(0.2)

    def test_max_lr_location_matches_grid_search(self):
        x = np.array([-3.0, 3.0])
        theta = np.linspace(-10.0, 10.0, 10_001)
        grid_cauchy = cauchy_base().log_pdf(x[None, :] - theta[:, None]).sum(axis=1).max()
        grid_normal = normal_base().log_pdf(x[None, :] - theta[:, None]).sum(axis=1).max()
        value = max_lr_location(x, normal_base(), cauchy_base())
        assert value == pytest.approx(grid_cauchy - grid_normal, abs=1e-5)
        # Cauchy optima sit at ±√8 where the likelihood product is 36
        assert value == pytest.approx(9.0 - math.log(18 * math.pi), abs=1e-9)

    def test_location_mle_is_shift_equivariant(self):
        x = np.array([-0.7, 0.2, 1.9, 3.1])
        for base in (normal_base(), cauchy_base()):
            assert mle_location(x + 5.5, base) == pytest.approx(mle_location(x, base) + 5.5, abs=1e-6)

    def test_scale_mle_is_scale_equivariant(self):
        x = np.array([0.4, 1.1, 2.7])
        for base in (exponential_base(), half_normal_base()):
            assert mle_scale(3.7 * x, base) == pytest.approx(3.7 * mle_scale(x, base), rel=1e-7)

    def test_unconverged_rows_are_polished(self, mocker):
        mocker.patch("app.modules.statistics.mle.MAX_ITER", 2)
        polish = mocker.spy(mle.optimize, "minimize_scalar")
        x = np.array([0.3, -1.2, 2.0, 0.8])
        assert mle_location(x, normal_base()) == pytest.approx(x.mean(), abs=1e-7)
        assert polish.call_count == 1
