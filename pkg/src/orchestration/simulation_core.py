"""
Shared simulation core functions

Used by Simulation and by the offline `indicate` / `refine-plan` commands so
that stored snapshots are treated exactly like in-run states.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.common.config import RunConfig
from src.common.exceptions import ConfigurationError
from src.common.logging import get_logger
from src.common.models import HybridState
from src.cases.definitions import CaseSpec, get_case
from src.indicators.annsi import ShockLocalizer
from src.indicators.base_indicator import Indicator
from src.numerics.basis import ElementOperators, get_operators, subcell_centers
from src.numerics.euler import get_flux_function
from src.solver.fvsubcell import switch_elements
from src.solver.mesh import Mesh2D
from src.solver.operator import HybridOperator
from src.storage.base import Snapshot


def build_mesh(case: CaseSpec, config: RunConfig) -> Mesh2D:
    """Case mesh with the run's element-count override and refinement"""
    return case.build_mesh(elements=config.mesh, refinement=tuple(config.mesh_refinement))


def build_operator(case: CaseSpec, mesh: Mesh2D, config: RunConfig) -> HybridOperator:
    """Hybrid operator with the configured (or case default) flux"""
    flux = get_flux_function(config.flux or case.flux, config.entropy_fix, config.entropy_fix_delta)
    return HybridOperator(mesh, config.degree, case.boundary_set(), flux)


def solution_coordinates(mesh: Mesh2D, state: HybridState) -> Tuple[np.ndarray, np.ndarray]:
    """Coordinates of the stored values: Gauss nodes on DG elements, sub-cell centers on FV elements"""
    ops = get_operators(state.degree)
    x, y = mesh.node_coordinates(ops.nodes)
    fv = state.fv_mask
    if np.any(fv):
        xc, yc = mesh.node_coordinates(subcell_centers(state.degree))
        x[fv] = xc[fv]
        y[fv] = yc[fv]
    return x, y


def apply_indicator(
    state: HybridState,
    indicator: Indicator,
    ops: Optional[ElementOperators] = None
) -> HybridState:
    """
    Evaluate the indicator, update flags by hysteresis and switch representations

    Returns:
        New state carrying the indicator values of this evaluation
    """
    ops = ops or get_operators(state.degree)
    flags, values = indicator.update_flags(state)
    switched = switch_elements(state, flags, ops)
    if switched is state:
        switched = state.copy()
    switched.indicator_values = np.asarray(values, dtype=np.float64)
    return switched


def localize_edges(state: HybridState, localizer: Optional[ShockLocalizer]) -> Dict[int, np.ndarray]:
    """Edge maps keyed by element id (empty without a localizer)"""
    if localizer is None:
        return {}
    elements, maps = localizer.localize(state)
    return {int(e): m.astype(np.uint8) for e, m in zip(elements, maps)}


def make_snapshot(
    mesh: Mesh2D,
    state: HybridState,
    case: str,
    localizer: Optional[ShockLocalizer] = None,
    metadata: Optional[Dict[str, object]] = None
) -> Snapshot:
    x, y = solution_coordinates(mesh, state)
    return Snapshot(
        state=state,
        x=x,
        y=y,
        case=case,
        edge_maps=localize_edges(state, localizer),
        metadata=dict(metadata or {}),
    )


def evaluate_indicators(state: HybridState, indicators: List[Indicator], logger=None) -> pd.DataFrame:
    """
    Offline per-element report of several indicators on one state

    Each indicator sees the stored flags as the previous hysteresis state.

    Returns:
        DataFrame with columns element, representation and
        '<kind>_value' / '<kind>_flag' per indicator
    """
    if logger is None:
        logger = get_logger("SimulationCore")

    report = pd.DataFrame({
        'element': np.arange(state.n_elements),
        'representation': state.flags.astype(np.int64),
    })
    for indicator in indicators:
        name = indicator.kind.value
        flags, values = indicator.update_flags(state)
        report[f'{name}_value'] = values
        report[f'{name}_flag'] = np.asarray(flags, dtype=np.int64)
        logger.info(f"Indicator {name}: {int(np.sum(flags))} of {state.n_elements} element(s) flagged")
    return report


def fv_fraction(state: HybridState) -> float:
    return float(np.mean(state.fv_mask)) if state.n_elements else 0.0


def snapshot_mesh(snapshot: Snapshot) -> Mesh2D:
    """
    Rebuild the mesh a snapshot was written on

    Raises:
        ConfigurationError: unknown case or element count differing from the snapshot
    """
    run = snapshot.metadata.get('custom_metadata', {}) or {}
    case = get_case(snapshot.case, **(run.get('case_options') or {}))
    mesh_override = run.get('mesh')
    mesh = case.build_mesh(
        elements=tuple(mesh_override) if mesh_override else None,
        refinement=tuple(run.get('mesh_refinement') or (1, 1)),
    )
    if mesh.n_elements != snapshot.state.n_elements:
        raise ConfigurationError(
            f"Snapshot has {snapshot.state.n_elements} elements, case '{snapshot.case}' mesh has {mesh.n_elements}"
        )
    return mesh
