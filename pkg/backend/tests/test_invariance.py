import numpy as np
import pytest

from app.modules.common.errors import ConfigError, InvarianceError
from app.modules.densities.service import make_quad_alternatives, make_symmetric_pair
from app.modules.densities.shapes import concave_shape, convex_shape
from app.modules.invariance.service import (
    GroupAction,
    InducedPermutation,
    apply,
    composition_consistent,
    induced_permutations,
    is_transitive,
    orbit_average_deviation,
    probe_points,
    quad_reflection_group,
    reflection_group,
    resolve_group,
    symmetrize_region_check,
)
from app.modules.statistics.service import avg_lr_statistic, max_lr_statistic


@pytest.mark.unit
class TestGroupAction:
    def test_quad_group_composition(self):
        group = quad_reflection_group()
        assert group.order == 4
        assert group.identity_index == 0
        # (1 - x, y) after (x, 1 - y) is (1 - x, 1 - y)
        assert group.compose(1, 2) == 3
        assert all(group.compose(g, group.inverse_index(g)) == 0 for g in range(4))

    def test_reflection_is_an_involution(self, rng):
        group = reflection_group(3)
        x = rng.random((50, 3))
        np.testing.assert_allclose(apply(group, 1, apply(group, 1, x)), x, rtol=0, atol=1e-15)
        np.testing.assert_array_equal(apply(group, 0, x), x)

    def test_unclosed_masks_are_rejected(self):
        with pytest.raises(InvarianceError):
            GroupAction("broken", masks=((False, False), (True, False), (False, True)))

    def test_missing_identity_is_rejected(self):
        with pytest.raises(InvarianceError):
            GroupAction("no-identity", masks=((True,),))

    def test_apply_checks_dimension(self):
        with pytest.raises(InvarianceError):
            apply(quad_reflection_group(), 1, np.zeros((3, 3)))

    def test_out_of_range_element(self):
        with pytest.raises(InvarianceError) as excinfo:
            quad_reflection_group().compose(0, 7)
        assert excinfo.value.element_index == 7

    def test_resolve_group(self):
        assert resolve_group("reflect-1d", 4).dimension == 4
        with pytest.raises(ConfigError):
            resolve_group("reflect-2d-quad", 3)
        with pytest.raises(ConfigError):
            resolve_group("rotate", 2)

    def test_probe_points_are_deterministic(self):
        np.testing.assert_array_equal(probe_points(2, 10), probe_points(2, 10))
        assert not np.array_equal(probe_points(2, 10), probe_points(2, 10, name="other"))


@pytest.mark.unit
class TestInducedPermutations:
    def test_quad_alternatives(self):
        group = quad_reflection_group()
        quad = make_quad_alternatives()
        perms = induced_permutations(group, quad.alternatives)
        assert is_transitive(perms, 4)
        assert composition_consistent(group, perms)
        assert perms[0].permutation == (0, 1, 2, 3)
        assert perms[1].record(group).mapping == [2, 1, 4, 3]
        assert perms[3].record(group).label == "g4"

    def test_symmetric_pair_swaps(self):
        pair = make_symmetric_pair(convex_shape(), 2)
        perms = induced_permutations(reflection_group(2), pair.alternatives)
        assert [perm.permutation for perm in perms] == [(0, 1), (1, 0)]

    def test_unrelated_alternatives_are_rejected(self):
        pair = make_symmetric_pair(convex_shape(), 1)
        with pytest.raises(InvarianceError):
            induced_permutations(reflection_group(1), [pair.p1])

    def test_identity_only_is_not_transitive(self):
        assert not is_transitive([InducedPermutation(0, (0, 1))], 2)

    def test_inconsistent_composition_is_detected(self):
        group = reflection_group(1)
        perms = [InducedPermutation(0, (0, 1)), InducedPermutation(1, (0, 1))]
        assert composition_consistent(group, perms)
        bad = [InducedPermutation(0, (1, 0)), InducedPermutation(1, (1, 0))]
        assert not composition_consistent(group, bad)


@pytest.mark.unit
class TestStatisticInvariance:
    @pytest.mark.parametrize("shape", [convex_shape(), concave_shape()])
    def test_pair_statistics_are_invariant(self, shape):
        pair = make_symmetric_pair(shape, 3)
        group = reflection_group(3)
        x = probe_points(3, 1000)
        for stat in (avg_lr_statistic(pair.null, pair.alternatives), max_lr_statistic(pair.null, pair.alternatives)):
            before = stat.evaluate(x).values
            after = stat.evaluate(apply(group, 1, x)).values
            np.testing.assert_allclose(after, before, rtol=1e-11, atol=1e-11)

    def test_quad_statistics_are_invariant(self):
        quad = make_quad_alternatives()
        group = quad_reflection_group()
        x = probe_points(2, 1000)
        stat = avg_lr_statistic(quad.null, quad.alternatives)
        before = stat.evaluate(x).values
        for element in range(group.order):
            np.testing.assert_allclose(stat.evaluate(apply(group, element, x)).values, before, rtol=1e-11, atol=1e-11)

    def test_orbit_average_is_invariant(self):
        pair = make_symmetric_pair(concave_shape(), 2)
        assert orbit_average_deviation(reflection_group(2), pair.alternatives, probe_points(2)) < 1e-12


@pytest.mark.unit
class TestRegionCheck:
    def test_symmetric_region_passes(self):
        report = symmetrize_region_check(lambda x: np.abs(x[:, 0] - 0.5) > 0.3, reflection_group(1), probe_points(1))
        assert report.invariant
        assert report.probes == 100

    def test_one_sided_region_fails(self):
        report = symmetrize_region_check(lambda x: x[:, 0] > 0.5, reflection_group(1), probe_points(1))
        assert not report.invariant
        assert report.violation_count == 100
        assert report.violations[0].element == 2
