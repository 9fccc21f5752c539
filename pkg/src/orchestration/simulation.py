"""
Simulation orchestrator for the hybrid DG/FV solver

Integrates a case ab initio: after every time step the indicator updates
the element flags and the flagged elements move to the sub-cell grid.
Snapshots are written at a fixed simulation-time interval, with edge maps
when a localization network is attached.
"""
import time
from datetime import datetime
from typing import Any, Dict, Optional, Sequence

import numpy as np

from src.common.config import RunConfig
from src.common.exceptions import PositivityError, SimulationError
from src.common.logging import get_logger
from src.common.models import HybridState, SimulationResult
from src.cases.definitions import CaseSpec
from src.indicators.annsi import ShockLocalizer
from src.indicators.base_indicator import Indicator
from src.solver.dgsem import compute_dt
from src.solver.timestepping import rk_step
from src.storage.base import SnapshotStorage
from src.storage.file_storage import FileStorage
from src.orchestration.simulation_core import (
    apply_indicator,
    build_mesh,
    build_operator,
    fv_fraction,
    make_snapshot,
)

# Relative slack when comparing the current time with output times
TIME_TOLERANCE = 1e-12


class Simulation:
    """
    Simulation orchestrator connecting case, indicator, localizer and storage

    Example:
        simulation = (Simulation(run_config)
            .with_case(get_case("riemann4"))
            .with_indicator(ModalIndicator(run_config.indicator, 5))
            .run())
        print(simulation.result.final_time)
    """

    def __init__(self, config: RunConfig, simulation_id: Optional[str] = None):
        """
        Initialize simulation

        Args:
            config: validated run settings
            simulation_id: Optional identifier used in log lines
        """
        self.config = config
        self.simulation_id = simulation_id or f"simulation_{int(time.time())}"
        self.logger = get_logger("Simulation")

        self._case: Optional[CaseSpec] = None
        self._indicator: Optional[Indicator] = None
        self._localizer: Optional[ShockLocalizer] = None
        self._storage: Optional[SnapshotStorage] = None
        self._formats: Sequence[str] = tuple(config.output_formats)

        self.mesh = None
        self.operator = None
        self.state: Optional[HybridState] = None
        self.result: Optional[SimulationResult] = None

    def with_case(self, case: CaseSpec) -> 'Simulation':
        """
        Set the case to integrate

        Returns:
            self for chaining
        """
        self._case = case
        self.logger.info(f"Case set: {case.name}")
        return self

    def with_indicator(self, indicator: Indicator) -> 'Simulation':
        self._indicator = indicator
        self.logger.info(f"Indicator set: {indicator.__class__.__name__}")
        return self

    def with_localizer(self, localizer: Optional[ShockLocalizer]) -> 'Simulation':
        """Attach the localization network; edge maps are written with every snapshot"""
        self._localizer = localizer
        if localizer is not None:
            self.logger.info("Localizer set: edge maps written with snapshots")
        return self

    def with_storage(self, storage: SnapshotStorage) -> 'Simulation':
        self._storage = storage
        return self

    # ------------------------------------------------------------------

    def _t_end(self) -> float:
        return self._case.t_end if self.config.t_end is None else float(self.config.t_end)

    def _output_times(self, t_end: float) -> np.ndarray:
        interval = self.config.output_interval
        if interval is None or interval <= 0.0 or t_end <= 0.0:
            return np.array([t_end])
        count = int(np.floor(t_end / interval + TIME_TOLERANCE))
        times = interval * np.arange(1, count + 1)
        if times.size == 0 or times[-1] < t_end * (1.0 - TIME_TOLERANCE):
            times = np.append(times, t_end)
        return times

    def _write(self, state: HybridState, key: str, **metadata: Any) -> str:
        # enough to rebuild the mesh when the snapshot is read back
        metadata.update({
            'mesh': list(self.config.mesh) if self.config.mesh else None,
            'mesh_refinement': list(self.config.mesh_refinement),
            'case_options': dict(self.config.case_options),
            'indicator': self._indicator.kind.value,
        })
        snapshot = make_snapshot(self.mesh, state, self._case.name, self._localizer, metadata)
        self._storage.save_snapshot(key, snapshot, self._formats)
        return key

    def run(self) -> 'Simulation':
        """
        Integrate from t = 0 to the end time

        Returns:
            self with result populated

        Raises:
            SimulationError: no case set
            PositivityError: non-physical state; the last admissible state
                is written as '<prefix>_failure' before re-raising
        """
        if self._case is None:
            raise SimulationError("No case set. Call with_case() first.")
        if self._indicator is None:
            raise SimulationError("No indicator set. Call with_indicator() first.")
        if self._storage is None:
            self._storage = FileStorage(self.config.output_dir)

        config = self.config
        self.mesh = build_mesh(self._case, config)
        self.operator = build_operator(self._case, self.mesh, config)
        ops = self.operator.ops
        t_end = self._t_end()
        output_times = self._output_times(t_end)

        self.logger.info(
            f"Starting simulation {self.simulation_id}: {self._case.name}, N={config.degree}, "
            f"{self.mesh.n_elements} elements, t_end={t_end:g}, {len(output_times)} output time(s)"
        )
        result = SimulationResult(success=False, case=self._case.name, start_time=datetime.now())
        self.result = result

        state = apply_indicator(self._case.initial_state(self.mesh, config.degree), self._indicator, ops)
        self.state = state
        result.snapshots.append(self._write(state, "snapshot_00000"))
        result.max_fv_fraction = fv_fraction(state)

        next_output = 0
        started = time.time()
        try:
            while state.time < t_end * (1.0 - TIME_TOLERANCE) and next_output < len(output_times):
                if config.max_steps is not None and state.step >= config.max_steps:
                    self.logger.warning(f"Stopped after max_steps={config.max_steps} at t={state.time:.6g}")
                    break

                target = output_times[next_output]
                dt = compute_dt(state.fields, self.mesh.dx, self.mesh.dy, config.cfl, state.time)
                dt = min(dt, target - state.time)
                fv_mask = state.fv_mask

                def rhs(fields, t, fv_mask=fv_mask):
                    return self.operator(fields, fv_mask, t)

                state = rk_step(state, rhs, dt)
                self.operator.check_admissible(state.fields, state.fv_mask, state.time)
                state = apply_indicator(state, self._indicator, ops)
                self.state = state
                result.max_fv_fraction = max(result.max_fv_fraction, fv_fraction(state))

                if state.time >= target * (1.0 - TIME_TOLERANCE):
                    state.time = float(target)
                    next_output += 1
                    result.snapshots.append(self._write(state, f"snapshot_{next_output:05d}"))
                    self.logger.info(
                        f"t={state.time:.6g} step {state.step}: "
                        f"{int(np.sum(state.fv_mask))} FV element(s), {time.time() - started:.1f}s"
                    )

            result.success = True

        except PositivityError as e:
            last = self.state
            result.errors.append(str(e))
            result.metadata['failure'] = {'element': e.element, 'time': e.time, 'subcell': e.subcell}
            self.logger.error(f"Simulation failed at t={e.time}: {e}")
            result.snapshots.append(self._write(
                last, "snapshot_failure", failure_element=e.element, failure_time=e.time
            ))
            raise

        finally:
            result.end_time = datetime.now()
            result.final_time = self.state.time
            result.steps = self.state.step
            result.metadata['indicator'] = self._indicator.get_stats()
            result.metadata['operator'] = {
                'evaluations': self.operator.stats.evaluations,
                'mixed_faces': self.operator.stats.mixed_faces,
            }

        self.logger.info(
            f"Simulation completed: t={result.final_time:.6g} in {result.steps} steps, "
            f"{len(result.snapshots)} snapshot(s), max FV fraction {result.max_fv_fraction:.3f} "
            f"({result.duration_seconds:.1f}s)"
        )
        return self

    def get_stats(self) -> Dict[str, Any]:
        """Get simulation statistics"""
        if not self.result:
            return {}
        return {
            'simulation_id': self.simulation_id,
            'case': self.result.case,
            'success': self.result.success,
            'final_time': self.result.final_time,
            'steps': self.result.steps,
            'snapshots': list(self.result.snapshots),
            'max_fv_fraction': self.result.max_fv_fraction,
            'duration_seconds': self.result.duration_seconds,
            'errors': list(self.result.errors),
            'indicator_stats': self.result.metadata.get('indicator', {}),
        }
