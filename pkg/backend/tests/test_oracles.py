import numpy as np
import pytest

from app.modules.common.errors import ConfigError, UnsupportedShapeError
from app.modules.densities.service import make_quad_alternatives, make_symmetric_pair
from app.modules.densities.shapes import PowerShape, concave_shape, convex_shape
from app.modules.power.oracles import (
    analytic_region_n1,
    best_invariant_region,
    best_region_by_enumeration,
    block_of_region,
    discretize,
    exact_power_n1,
    grid_region,
    invariant_power_range,
    np_region_discrete,
    region_discrepancy,
    region_on_grid,
    unit_grid,
)
from app.modules.power.schemas import Region
from app.modules.statistics.service import max_lr_statistic


@pytest.mark.unit
class TestAnalyticRegions:
    def test_concave_regions_and_powers(self):
        shape = concave_shape()
        regions = analytic_region_n1(shape, 0.1)
        assert regions.max_lr.intervals == [(0.0, 0.05), (0.95, 1.0)]
        assert regions.avg_lr.intervals == [(0.45, 0.55)]
        assert exact_power_n1(shape, regions.max_lr) == pytest.approx(0.0852349, abs=5e-7)
        assert exact_power_n1(shape, regions.avg_lr) == pytest.approx(0.1060216, abs=5e-7)

    def test_convex_regions_coincide(self):
        regions = analytic_region_n1(convex_shape(), 0.1)
        assert regions.avg_lr == regions.max_lr
        assert regions.curvature == "convex"

    @pytest.mark.parametrize("exponent", [1.0, -0.5])
    def test_unsupported_shapes(self, exponent):
        with pytest.raises(UnsupportedShapeError):
            analytic_region_n1(PowerShape(exponent=exponent), 0.1)

    def test_region_outside_unit_interval(self):
        with pytest.raises(ConfigError):
            exact_power_n1(convex_shape(), Region(intervals=[(-0.1, 0.2)]))


@pytest.mark.unit
class TestDiscreteOracles:
    def test_concave_blocks(self):
        dp = discretize(make_symmetric_pair(concave_shape(), 1), 10)
        _, power = dp.block_masses()
        np.testing.assert_allclose(power, [0.1778, 0.196, 0.2047, 0.2096, 0.2118], atol=1e-3)
        assert dp.blocks[0] == (0, 9)

    def test_concave_best_invariant_region(self):
        dp = discretize(make_symmetric_pair(concave_shape(), 1), 10)
        result = best_invariant_region(dp, 0.2)
        assert result.blocks == [5]
        assert result.cells == [5, 6]
        assert result.avg_lr_cells == [5, 6]
        assert result.avg_lr_certified
        wider = best_invariant_region(dp, 0.4)
        assert wider.cells == [4, 5, 6, 7]
        assert wider.avg_lr_certified

    def test_convex_best_invariant_region(self):
        dp = discretize(make_symmetric_pair(convex_shape(), 1), 10)
        result = best_invariant_region(dp, 0.2)
        assert result.cells == [1, 10]
        assert result.power == pytest.approx(0.272, abs=1e-12)
        assert result.avg_lr_certified
        assert best_invariant_region(dp, 0.4).cells == [1, 2, 9, 10]

    def test_power_range(self):
        dp = discretize(make_symmetric_pair(concave_shape(), 1), 10)
        summary = invariant_power_range(dp, 0.2)
        assert summary.regions == 5
        assert summary.min_blocks == [1]
        assert summary.max_blocks == [5]
        assert summary.max_power > summary.min_power

    def test_analytic_regions_map_to_blocks(self):
        dp = discretize(make_symmetric_pair(concave_shape(), 1), 10)
        regions = analytic_region_n1(concave_shape(), 0.2)
        assert block_of_region(dp, regions.max_lr) == [1]
        assert block_of_region(dp, regions.avg_lr) == [5]

    def test_neyman_pearson_matches_brute_force(self):
        dp = discretize(make_symmetric_pair(concave_shape(), 1), 10)
        greedy = np_region_discrete(dp.p0, dp.alternatives[0], 0.3)
        brute = best_region_by_enumeration(dp.p0, dp.alternatives[0], 0.3)
        assert greedy.cells == [8, 9, 10]
        assert greedy.power == pytest.approx(brute.power, abs=1e-12)

    def test_ties_break_by_index(self):
        result = np_region_discrete([0.25] * 4, [0.25] * 4, 0.5)
        assert result.cells == [1, 2]
        assert result.null_mass == pytest.approx(0.5)

    def test_neyman_pearson_skips_cells_that_overflow_alpha(self):
        p0, p1 = [0.3, 0.4, 0.3], [0.6, 0.35, 0.05]
        greedy = np_region_discrete(p0, p1, 0.6)
        brute = best_region_by_enumeration(p0, p1, 0.6)
        assert greedy.cells == [1, 3]
        assert greedy.power == pytest.approx(0.65, abs=1e-12)
        assert greedy.power == pytest.approx(brute.power, abs=1e-12)
        assert greedy.null_mass == pytest.approx(0.6)

    def test_neyman_pearson_is_optimal_on_random_cells(self, rng):
        for _ in range(20):
            p0 = rng.dirichlet(np.ones(8))
            p1 = rng.dirichlet(np.ones(8))
            alpha = float(rng.uniform(0.05, 0.5))
            greedy = np_region_discrete(p0, p1, alpha)
            assert greedy.null_mass <= alpha + 1e-12
            assert greedy.power == pytest.approx(best_region_by_enumeration(p0, p1, alpha).power, abs=1e-12)

    @pytest.mark.parametrize("m", [9, 66])
    def test_invalid_cell_counts(self, m):
        with pytest.raises(ConfigError):
            discretize(make_symmetric_pair(convex_shape(), 1), m)

    def test_quad_mixture_region_is_certified(self):
        dp = discretize(make_quad_alternatives(), 8)
        assert len(dp.blocks) == 16
        result = best_invariant_region(dp, 0.1875)
        assert result.enumerated
        assert len(result.blocks) == 3
        assert result.avg_lr_certified

    def test_greedy_fallback_is_flagged(self, mocker):
        mocker.patch("app.modules.power.oracles.MAX_BLOCKS", 4)
        dp = discretize(make_symmetric_pair(concave_shape(), 1), 10)
        result = best_invariant_region(dp, 0.2)
        assert not result.enumerated
        assert result.maximizer_count is None
        with pytest.raises(ConfigError):
            best_invariant_region(dp, 0.2, allow_greedy=False)


@pytest.mark.unit
class TestGridRegions:
    def test_region_on_grid(self):
        region = region_on_grid(np.array([False, True, True, False]))
        assert region.intervals == [(0.25, 0.75)]
        assert region_on_grid(np.zeros(8, dtype=bool)).intervals == []

    def test_unit_grid_midpoints(self):
        np.testing.assert_allclose(unit_grid(4)[:, 0], [0.125, 0.375, 0.625, 0.875])

    def test_region_discrepancy(self):
        left = Region(intervals=[(0.0, 0.5)])
        right = Region(intervals=[(0.0, 0.25)])
        assert region_discrepancy(left, right, resolution=1024) == pytest.approx(0.25)
        assert region_discrepancy(left, left) == 0.0

    def test_grid_calibration_recovers_the_tails(self):
        pair = make_symmetric_pair(convex_shape(), 1)
        _, region = grid_region(max_lr_statistic(pair.null, pair.alternatives), 0.1)
        analytic = analytic_region_n1(convex_shape(), 0.1)
        assert region_discrepancy(region, analytic.max_lr) <= 4 / 2**20
