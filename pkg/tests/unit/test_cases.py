"""
Tests for the canonical test cases
"""
import numpy as np
import pytest

from src.cases import double_mach, forward_step, get_case, list_cases, riemann2d, sod_strip, stationary_shock
from src.cases.definitions import shock_distance
from src.common.exceptions import ConfigurationError
from src.common.models import FluxKind
from src.numerics.euler import GAMMA, max_wavespeed
from src.solver.mesh import EAST, NORTH, WEST


def boundary_tags(mesh):
    return {faces.tag for faces in mesh.boundary_faces}


class TestRiemann:

    @pytest.mark.parametrize("config, t_end", [(4, 0.25), (6, 0.2), (12, 0.25)])
    def test_end_times(self, config, t_end):
        assert riemann2d(config).t_end == t_end

    def test_quadrant_states(self):
        case = riemann2d(12)
        prim = case.initial_prim(np.array([0.75, 0.25, 0.25, 0.75]), np.array([0.75, 0.75, 0.25, 0.25]))
        np.testing.assert_allclose(prim, [
            [0.5313, 0.0, 0.0, 0.4],
            [1.0, 0.7276, 0.0, 1.0],
            [0.8, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.7276, 1.0],
        ])

    def test_default_mesh(self):
        case = riemann2d(4)
        assert case.default_elements == (50, 50)
        mesh = case.build_mesh(elements=(10, 10))
        assert mesh.n_elements == 100
        assert boundary_tags(mesh) == {'farfield'}

    def test_unknown_configuration(self):
        with pytest.raises(ConfigurationError):
            riemann2d(3)


class TestDoubleMach:

    def test_post_shock_state(self):
        post = double_mach().metadata['post_shock']
        np.testing.assert_allclose(post, [8.0, 8.25 * np.cos(np.pi / 6), -8.25 * np.sin(np.pi / 6), 116.5], rtol=1e-12)
        assert double_mach().metadata['pre_shock'] == [1.4, 0.0, 0.0, 1.0]

    def test_initial_shock_position(self):
        case = double_mach()
        prim = case.initial_prim(np.array([0.1, 1.0, 0.7, 0.8]), np.array([0.0, 0.0, 1.0, 1.0]))
        np.testing.assert_allclose(prim[:, 0], [8.0, 1.4, 8.0, 1.4])

    def test_layout(self):
        case = double_mach()
        assert case.t_end == 0.2
        assert case.default_elements == (49, 12)
        assert boundary_tags(case.build_mesh()) == {'inflow', 'outflow', 'bottom', 'top'}


class TestForwardStep:

    def test_blocks(self):
        case = forward_step()
        mesh = case.build_mesh()
        assert mesh.n_elements == 50 + 200 + 800
        # lower inlet top row meets the upper inlet, upper inlet meets the channel
        assert mesh.neighbors[49, NORTH] == 59
        assert mesh.neighbors[59, EAST] == 250
        assert mesh.neighbors[250, WEST] == 59
        # the step face is a wall
        assert mesh.neighbors[49, EAST] == -1
        assert mesh.tags[49, EAST] == 'wall'
        assert boundary_tags(mesh) == {'inflow', 'outflow', 'wall'}
        assert case.default_elements == (50, 25)

    def test_inflow(self):
        case = forward_step()
        assert case.flux == FluxKind.HLLE
        assert case.t_end == 4.0
        state = case.initial_state(case.build_mesh(), 2)
        np.testing.assert_allclose(max_wavespeed(state.fields), 4.0)

    def test_mesh_override_rejected(self):
        with pytest.raises(ConfigurationError):
            forward_step().build_mesh(elements=(10, 10))


class TestSmallCases:

    def test_sod_strip(self):
        case = sod_strip(elements=8)
        mesh = case.build_mesh()
        assert mesh.n_elements == 8
        assert mesh.periodic_y
        assert boundary_tags(mesh) == {'left', 'right'}
        state = case.initial_state(mesh, 3)
        assert state.fields[0, 0, 0, 0] == 1.0
        assert state.fields[7, 0, 0, 0] == 0.125

    def test_stationary_shock_jump_conditions(self):
        case = stationary_shock(angle=30.0, mach=2.0)
        normal = np.array(case.metadata['normal'])
        points = np.array([[0.1, 0.5], [0.9, 0.5]])
        up, down = case.exact(points[:, 0], points[:, 1], 0.0)
        un_up = up[1:3] @ normal
        un_down = down[1:3] @ normal
        assert up[0] * un_up == pytest.approx(down[0] * un_down)
        assert up[0] * un_up ** 2 + up[3] == pytest.approx(down[0] * un_down ** 2 + down[3])
        assert un_up / np.sqrt(GAMMA * up[3] / up[0]) == pytest.approx(2.0)

    def test_shock_distance(self):
        case = stationary_shock(position=0.55)
        assert shock_distance(case, 0.6, 0.3) == pytest.approx(0.05)
        assert shock_distance(case, 0.55, 0.9) == pytest.approx(0.0)

    def test_vortex_is_periodic(self):
        case = get_case('isentropic_vortex', elements=(4, 4))
        mesh = case.build_mesh()
        assert mesh.boundary_faces == []
        np.testing.assert_allclose(case.exact(np.array([1.0]), np.array([2.0]), 10.0),
                                   case.exact(np.array([1.0]), np.array([2.0]), 0.0), atol=1e-12)


class TestRegistry:

    def test_all_initial_states_physical(self):
        for name in list_cases():
            case = get_case(name)
            state = case.initial_state(case.build_mesh(refinement=(1, 1)), 1)
            assert np.all(state.fields[..., 0] > 0.0)

    def test_unknown_case(self):
        with pytest.raises(ConfigurationError, match="Unknown case"):
            get_case('shock_bubble')

    def test_bad_option(self):
        with pytest.raises(ConfigurationError):
            get_case('sod_strip', resolution=5)

    def test_non_physical_initializer(self):
        case = sod_strip()
        case.initializer = lambda x, y: np.zeros(np.shape(x) + (4,))
        with pytest.raises(ConfigurationError):
            case.initial_state(case.build_mesh(), 2)
