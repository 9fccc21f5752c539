"""
Tests for the classical indicators, hysteresis and refinement planning
"""
import numpy as np
import pytest

from src.common.config import IndicatorConfig
from src.common.exceptions import ConfigurationError
from src.common.models import IndicatorKind, Representation, SplitKind
from src.indicators import JumpIndicator, ModalIndicator, NoIndicator, create_indicator, hysteresis_update
from src.indicators.jump import jump_indicator
from src.indicators.meshref import (
    build_refine_plan,
    child_field,
    child_offsets,
    grade_levels,
    line_weights,
    meshref_indicator,
    meshref_indicators,
    refinement_factors,
)
from src.indicators.modal import FLOOR, modal_indicator
from src.numerics.basis import get_operators, subcell_centers
from tests.conftest import constant_state, step_density


class TestHysteresis:

    @pytest.mark.parametrize("current, value, expected", [
        (Representation.DG, -4.4, Representation.FV),
        (Representation.DG, -4.6, Representation.DG),
        (Representation.FV, -4.6, Representation.FV),
        (Representation.FV, -4.8, Representation.DG),
    ])
    def test_modal_thresholds(self, current, value, expected):
        assert hysteresis_update(current, value, -4.5, -4.7) == expected

    def test_array_update(self):
        flags = np.array([0, 0, 1, 1], dtype=np.int8)
        values = np.array([0.02, 0.011, 0.011, 0.005])
        np.testing.assert_array_equal(hysteresis_update(flags, values, 0.012, 0.01), [1, 0, 1, 0])


class TestModal:

    def test_constant_gives_floor(self):
        ops = get_operators(5)
        assert modal_indicator(np.full((6, 6), 2.5), ops) == FLOOR

    def test_scale_invariant(self, rng):
        ops = get_operators(5)
        values = rng.uniform(0.5, 1.5, (4, 6, 6))
        np.testing.assert_allclose(modal_indicator(3.0 * values, ops), modal_indicator(values, ops), atol=1e-12)

    def test_step_exceeds_smooth(self):
        ops = get_operators(5)
        x = ops.nodes
        smooth = 1.0 + 0.1 * np.sin(x)[:, None] * np.ones(6)[None, :]
        step = step_density(5, 3)
        assert modal_indicator(step, ops) > -4.5
        assert modal_indicator(smooth, ops) < modal_indicator(step, ops)

    def test_bounded_above_by_zero(self, rng):
        values = modal_indicator(rng.uniform(0.1, 1.0, (10, 4, 4)), get_operators(3))
        assert np.all(values <= 1e-12)
        assert np.all(values >= FLOOR)


class TestJump:

    def test_constant_is_zero(self):
        assert jump_indicator(np.full((6, 6), 0.7)) == pytest.approx(0.0, abs=1e-15)

    def test_scale_invariant(self, rng):
        values = rng.uniform(0.5, 1.5, (3, 6, 6))
        np.testing.assert_allclose(jump_indicator(5.0 * values), jump_indicator(values), rtol=1e-12)

    def test_step_flags(self):
        # columns 1-2 see the low state, columns 3-4 the high one
        low_ratio = (0.125 - 2.0 + 1.0) / (0.125 + 2.0 + 1.0)
        high_ratio = (0.125 - 0.25 + 1.0) / (0.125 + 0.25 + 1.0)
        expected = (2 * low_ratio + 2 * high_ratio) / 6.0
        assert jump_indicator(step_density(5, 3)) == pytest.approx(expected)
        assert expected > 0.012

    def test_linear_field_does_not_flag(self):
        x = subcell_centers(5)
        values = (1.0 + 0.3 * x)[:, None] * np.ones(6)[None, :]
        assert abs(jump_indicator(values)) < 0.012


class TestIndicatorObjects:

    def test_factory(self):
        assert isinstance(create_indicator(IndicatorConfig(kind=IndicatorKind.MODAL), 3), ModalIndicator)
        assert isinstance(create_indicator(IndicatorConfig(kind=IndicatorKind.JUMP), 3), JumpIndicator)
        assert isinstance(create_indicator(IndicatorConfig(kind=IndicatorKind.NONE), 3), NoIndicator)
        with pytest.raises(ConfigurationError):
            create_indicator(IndicatorConfig(kind=IndicatorKind.ANNSI), 3)

    def test_update_flags_on_state(self):
        indicator = JumpIndicator(IndicatorConfig(kind=IndicatorKind.JUMP), 5)
        state = constant_state(3, 5)
        state.fields[1, ..., 0] = step_density(5, 3)
        flags, values = indicator.update_flags(state)
        assert flags.tolist() == [0, 1, 0]
        assert values[1] > 0.012
        stats = indicator.get_stats()
        assert stats['switches_to_fv'] == 1
        assert stats['kind'] == 'jump'

    def test_pressure_variable(self):
        indicator = ModalIndicator(IndicatorConfig(kind=IndicatorKind.MODAL, variable="pressure"), 3)
        state = constant_state(2, 3)
        np.testing.assert_allclose(indicator.nodal_variable(state), 1.0)

    def test_no_indicator_never_flags(self):
        indicator = NoIndicator(IndicatorConfig(kind=IndicatorKind.NONE), 3)
        flags, _ = indicator.update_flags(constant_state(4, 3))
        assert not np.any(flags)


class TestMeshRefinement:

    def test_line_weights(self):
        weights = line_weights(10)
        assert weights[0] == 0.0
        assert weights[1] == 0.0
        assert weights[2] == pytest.approx(2.7)
        assert weights[3] == pytest.approx(7.29)

    def test_two_points_per_line(self):
        edge_map = np.zeros((10, 10), dtype=np.uint8)
        edge_map[4:6, :] = 1
        i_x, _ = meshref_indicator(edge_map)
        assert i_x == pytest.approx(27.0)

    def test_three_points_per_line(self):
        edge_map = np.zeros((10, 10), dtype=np.uint8)
        edge_map[4:7, :] = 1
        i_x, _ = meshref_indicator(edge_map)
        assert i_x == pytest.approx(72.9)
        assert 33.0 <= i_x < 172.0

    def test_monotone_in_flagged_points(self, rng):
        edge_map = (rng.uniform(size=(6, 6)) > 0.6).astype(np.uint8)
        edge_map[0, 0] = 0
        before = meshref_indicator(edge_map)
        edge_map[0, 0] = 1
        after = meshref_indicator(edge_map)
        assert after[0] >= before[0]
        assert after[1] >= before[1]

    def test_empty_maps_give_empty_plan(self):
        plan = build_refine_plan(np.zeros((5, 4, 4), dtype=np.uint8))
        assert plan.is_empty()
        assert plan.entries == []
        assert refinement_factors(plan) == (1, 1)

    def test_split_x_and_rotation(self):
        edge_map = np.zeros((4, 4), dtype=np.uint8)
        edge_map[:, 0:3] = 1
        i_x, i_y = meshref_indicator(edge_map)
        assert i_x >= 33.0 > i_y

        plan = build_refine_plan(np.stack([edge_map, edge_map.T, np.zeros_like(edge_map)]))
        splits = {entry.element_id: entry.split for entry in plan.entries}
        assert splits == {0: SplitKind.SPLIT_X, 1: SplitKind.SPLIT_Y}
        assert plan.entries[1].indicator_x == pytest.approx(i_y)
        assert plan.entries[1].indicator_y == pytest.approx(i_x)
        assert refinement_factors(plan) == (2, 2)

    def test_second_level_only_in_split_directions(self):
        edge_map = np.zeros((10, 10), dtype=np.uint8)
        edge_map[:, 0:2] = 1
        i_x, i_y = meshref_indicator(edge_map)
        assert i_x >= 172.0
        assert i_y < 33.0

        def localize(fields):
            return np.ones(fields.shape, dtype=np.uint8)

        density = np.ones((1, 10, 10))
        plan = build_refine_plan(edge_map[None], subcell_density=density, localize=localize)
        level2 = [entry for entry in plan.entries if entry.level == 2]
        assert [entry.child for entry in level2] == [0, 1]
        assert all(entry.split == SplitKind.SPLIT_X for entry in level2)
        assert refinement_factors(plan) == (4, 1)

    def test_grading_with_mesh_neighbors(self):
        neighbors = np.array([[-1, 1, -1, -1], [0, 2, -1, -1], [1, 3, -1, -1], [2, -1, -1, -1]])
        levels = np.array([[2, 0], [0, 0], [0, 0], [0, 0]])
        np.testing.assert_array_equal(grade_levels(levels, neighbors), [[2, 0], [1, 0], [0, 0], [0, 0]])

    def test_child_geometry(self):
        assert child_offsets(SplitKind.SPLIT_XY) == [(0, 0, 0), (1, 1, 0), (2, 0, 1), (3, 1, 1)]
        assert child_offsets(SplitKind.NONE) == []
        parent = np.arange(16.0).reshape(4, 4)
        right = child_field(parent, SplitKind.SPLIT_X, 1, 0)
        np.testing.assert_array_equal(right[:, 0], [8.0, 8.0, 12.0, 12.0])
        np.testing.assert_array_equal(right[0], parent[2])

    def test_stacked_indicators(self):
        maps = np.zeros((2, 4, 4), dtype=np.uint8)
        maps[1, 1:3, :] = 1
        values = meshref_indicators(maps)
        assert values.shape == (2, 2)
        np.testing.assert_allclose(values[0], 0.0)
        assert values[1, 0] == pytest.approx(4 * 2.7)
        assert meshref_indicators(np.zeros((0, 4, 4))).shape == (0, 2)
