"""
Integration tests for the simulation driver on small cases
"""
import json

import numpy as np
import pytest

from src.cases import get_case
from src.common.config import IndicatorConfig
from src.common.exceptions import PositivityError, SimulationError
from src.common.models import IndicatorKind
from src.indicators import create_indicator
from src.numerics.basis import get_operators, subcell_centers
from src.numerics.exact_riemann import ExactRiemannSolver, PrimState1D
from src.orchestration.simulation import Simulation
from src.solver.operator import HybridOperator
from src.storage import FileStorage


def run(config, case=None, indicator=None):
    case = case or get_case(config.case, **config.case_options)
    indicator = indicator or create_indicator(config.indicator, config.degree)
    return Simulation(config, simulation_id="test").with_case(case).with_indicator(indicator).run()


def total_mass(simulation):
    state = simulation.state
    mesh = simulation.mesh
    w = get_operators(state.degree).weights
    dg = ~state.fv_mask
    mass = np.einsum('i,j,eij,e->', w, w, state.fields[dg, ..., 0], mesh.jacobian[dg])
    n = state.degree + 1
    mass += np.sum(state.fields[state.fv_mask, ..., 0].sum(axis=(1, 2)) * mesh.area[state.fv_mask]) / n ** 2
    return mass


class TestSodStrip:

    def test_short_run_with_jump_indicator(self, jump_run_config):
        config = jump_run_config.model_copy(update={'t_end': 0.05, 'mesh': (16, 1)})
        simulation = run(config)
        result = simulation.result
        assert result.success
        assert result.final_time == pytest.approx(0.05)
        assert result.snapshots == ["snapshot_00000", "snapshot_00001"]
        assert result.steps > 0
        assert 0.0 <= result.max_fv_fraction <= 1.0
        # waves have not reached the Dirichlet ends
        assert total_mass(simulation) == pytest.approx(0.5625 * 0.1, rel=1e-10)

        stats = simulation.get_stats()
        assert stats['indicator_stats']['kind'] == 'jump'
        storage = FileStorage(config.output_dir)
        snapshot = storage.load_snapshot("snapshot_00001")
        assert snapshot.state.time == pytest.approx(0.05)
        assert snapshot.metadata['custom_metadata']['mesh'] == [16, 1]

    def test_zero_end_time_writes_initial_snapshot_only(self, jump_run_config):
        simulation = run(jump_run_config.model_copy(update={'t_end': 0.0}))
        assert simulation.result.success
        assert simulation.result.snapshots == ["snapshot_00000"]
        assert simulation.result.steps == 0

    def test_output_interval(self, jump_run_config):
        config = jump_run_config.model_copy(update={'t_end': 0.02, 'output_interval': 0.01, 'mesh': (8, 1)})
        simulation = run(config)
        assert simulation.result.snapshots == ["snapshot_00000", "snapshot_00001", "snapshot_00002"]
        times = [FileStorage(config.output_dir).load_snapshot(key).state.time for key in simulation.result.snapshots]
        assert times == pytest.approx([0.0, 0.01, 0.02])

    def test_without_indicator_stays_dg(self, jump_run_config):
        config = jump_run_config.model_copy(update={
            't_end': 0.01,
            'mesh': (8, 1),
            'indicator': IndicatorConfig(kind=IndicatorKind.NONE),
        })
        simulation = run(config)
        assert simulation.result.max_fv_fraction == 0.0
        assert not simulation.state.fv_mask.any()

    def test_max_steps(self, jump_run_config):
        simulation = run(jump_run_config.model_copy(update={'max_steps': 3, 'mesh': (8, 1)}))
        assert simulation.result.steps == 3
        assert simulation.result.final_time < 0.2


class TestFailures:

    def test_positivity_failure_writes_last_state(self, jump_run_config, mocker):
        config = jump_run_config.model_copy(update={'t_end': 0.05, 'mesh': (8, 1)})
        mocker.patch.object(
            HybridOperator, 'check_admissible',
            side_effect=PositivityError("negative pressure", element=4, time=0.001),
        )
        simulation = Simulation(config).with_case(get_case("sod_strip")).with_indicator(
            create_indicator(config.indicator, config.degree)
        )
        with pytest.raises(PositivityError):
            simulation.run()

        assert not simulation.result.success
        assert simulation.result.snapshots[-1] == "snapshot_failure"
        assert simulation.result.metadata['failure']['element'] == 4
        storage = FileStorage(config.output_dir)
        assert storage.exists("snapshot_failure")
        metadata = json.loads((storage.base_path / "snapshot_failure.meta.json").read_text())
        assert metadata['custom_metadata']['failure_element'] == 4

    def test_missing_case(self, jump_run_config):
        with pytest.raises(SimulationError):
            Simulation(jump_run_config).run()


@pytest.mark.slow
def test_sod_on_subcells_matches_exact_solution(jump_run_config):
    # thresholds below every possible value keep all elements on the sub-cell grid
    indicator = IndicatorConfig(kind=IndicatorKind.JUMP, upper=-10.0, lower=-20.0)
    config = jump_run_config.model_copy(update={'mesh': (50, 1), 'indicator': indicator, 't_end': 0.2})
    simulation = run(config)
    state = simulation.state
    assert state.fv_mask.all()

    x, _ = simulation.mesh.node_coordinates(subcell_centers(state.degree))
    exact = ExactRiemannSolver(PrimState1D(1.0, 0.0, 1.0), PrimState1D(0.125, 0.0, 0.1))
    rho_exact, _, _ = exact.solution(x.reshape(-1), 0.2)
    rho = state.fields[..., 0].reshape(-1)
    assert np.mean(np.abs(rho - rho_exact)) / np.mean(np.abs(rho_exact)) < 0.02


def density_l2_error(simulation):
    state = simulation.state
    ops = get_operators(state.degree)
    x, y = simulation.mesh.node_coordinates(ops.nodes)
    exact = get_case('isentropic_vortex').exact(x, y, state.time)[..., 0]
    error = (state.fields[..., 0] - exact) ** 2
    return np.sqrt(np.einsum('i,j,eij,e->', ops.weights, ops.weights, error, simulation.mesh.jacobian))


@pytest.mark.slow
def test_isentropic_vortex_convergence_order(jump_run_config):
    degree = 2
    errors = []
    for elements in ((8, 8), (16, 16)):
        config = jump_run_config.model_copy(update={
            'case': 'isentropic_vortex',
            'degree': degree,
            'mesh': elements,
            't_end': 0.5,
            'indicator': IndicatorConfig(kind=IndicatorKind.NONE),
            'output_dir': f"{jump_run_config.output_dir}_{elements[0]}",
        })
        simulation = run(config)
        assert simulation.state.time == pytest.approx(0.5)
        assert not simulation.state.fv_mask.any()
        errors.append(density_l2_error(simulation))
    assert np.log2(errors[0] / errors[1]) >= degree + 0.5
