"""
Finite-volume sub-cell scheme

Flagged elements carry (N+1) x (N+1) equispaced sub-cell means. They are
advanced with a second-order MUSCL scheme (minmod slopes on primitive
variables) and coupled to DG neighbors through numerical fluxes on the
sub-faces.
"""
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from src.common.models import HybridState, Representation
from src.common.logging import get_logger
from src.numerics.basis import ElementOperators, apply_xy
from src.numerics.euler import FluxFunction, cons_to_prim, pressure, prim_to_cons
from src.solver.mesh import EAST, NORTH, SOUTH, WEST

X_NORMAL = np.array([1.0, 0.0])
Y_NORMAL = np.array([0.0, 1.0])

logger = get_logger("fvsubcell")


def to_subcells(U: np.ndarray, ops: ElementOperators) -> np.ndarray:
    """DG nodal values -> sub-cell means (V_FV in x then y)"""
    return apply_xy(ops.transfer.V_FV, U)


def from_subcells(U: np.ndarray, ops: ElementOperators) -> np.ndarray:
    """Sub-cell means -> DG nodal values (exact inverse of to_subcells)"""
    return apply_xy(ops.transfer.V_FV_inv, U)


def minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.where(a * b > 0.0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


@dataclass
class FaceStates:
    """Reconstructed conservative states on the four faces of every sub-cell"""
    minus_x: np.ndarray
    plus_x: np.ndarray
    minus_y: np.ndarray
    plus_y: np.ndarray

    def boundary(self, side: int) -> np.ndarray:
        """Reconstructed states on an element face, (n_elem, N+1, 4)"""
        if side == WEST:
            return self.minus_x[:, 0]
        if side == EAST:
            return self.plus_x[:, -1]
        if side == SOUTH:
            return self.minus_y[:, :, 0]
        return self.plus_y[:, :, -1]


def reconstruct(U: np.ndarray, ghosts: Dict[int, np.ndarray]) -> FaceStates:
    """
    MUSCL reconstruction with minmod slopes on (rho, u, v, p)

    Args:
        U: sub-cell means (n_elem, N+1, N+1, 4)
        ghosts: per side, the ghost sub-cell layer (n_elem, N+1, 4)

    Raises:
        InvalidStateError: non-physical sub-cell or ghost state
    """
    P = cons_to_prim(U)
    Pw = cons_to_prim(ghosts[WEST])
    Pe = cons_to_prim(ghosts[EAST])
    Ps = cons_to_prim(ghosts[SOUTH])
    Pn = cons_to_prim(ghosts[NORTH])

    Px = np.concatenate([Pw[:, None], P, Pe[:, None]], axis=1)
    dxs = np.diff(Px, axis=1)
    sx = minmod(dxs[:, :-1], dxs[:, 1:])

    Py = np.concatenate([Ps[:, :, None], P, Pn[:, :, None]], axis=2)
    dys = np.diff(Py, axis=2)
    sy = minmod(dys[:, :, :-1], dys[:, :, 1:])

    return FaceStates(
        minus_x=prim_to_cons(P - 0.5 * sx),
        plus_x=prim_to_cons(P + 0.5 * sx),
        minus_y=prim_to_cons(P - 0.5 * sy),
        plus_y=prim_to_cons(P + 0.5 * sy),
    )


def fv_update(
    states: FaceStates,
    boundary_flux: Dict[int, np.ndarray],
    dx: np.ndarray,
    dy: np.ndarray,
    flux_fn: FluxFunction
) -> np.ndarray:
    """
    Sub-cell time derivative from reconstructed states and element-face fluxes

    boundary_flux[WEST]/[EAST] hold x fluxes, [SOUTH]/[NORTH] y fluxes on the
    N+1 sub-faces of each element face.
    """
    n_elem, n = states.minus_x.shape[:2]

    Fx = np.empty((n_elem, n + 1, n, 4))
    Fx[:, 0] = boundary_flux[WEST]
    Fx[:, n] = boundary_flux[EAST]
    if n > 1:
        Fx[:, 1:n] = flux_fn(states.plus_x[:, :-1], states.minus_x[:, 1:], X_NORMAL)

    Gy = np.empty((n_elem, n, n + 1, 4))
    Gy[:, :, 0] = boundary_flux[SOUTH]
    Gy[:, :, n] = boundary_flux[NORTH]
    if n > 1:
        Gy[:, :, 1:n] = flux_fn(states.plus_y[:, :, :-1], states.minus_y[:, :, 1:], Y_NORMAL)

    inv_hx = (n / dx)[:, None, None, None]
    inv_hy = (n / dy)[:, None, None, None]
    return -inv_hx * (Fx[:, 1:] - Fx[:, :-1]) - inv_hy * (Gy[:, :, 1:] - Gy[:, :, :-1])


def lift_matrix(ops: ElementOperators) -> np.ndarray:
    """
    L2 lift of piecewise-constant sub-face fluxes to face Gauss nodes

    F_j = (h / w_j) sum_s V_FV[s, j] f_s with h = 2 / (N+1); preserves the
    face integral exactly.
    """
    h = 2.0 / ops.basis.n_nodes
    return (h / ops.weights)[:, None] * ops.transfer.V_FV.T


def mixed_interface_flux(
    low: np.ndarray,
    high: np.ndarray,
    low_dg: np.ndarray,
    high_dg: np.ndarray,
    ops: ElementOperators,
    flux_fn: FluxFunction,
    normal: np.ndarray,
    lift: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Flux across faces with at least one FV side

    DG traces are projected to sub-face means, a Riemann flux is taken per
    sub-face, and DG sides get the conservative lift back to their nodes.

    Args:
        low, high: face values on the negative / positive side of `normal`,
            (n_faces, N+1, 4); Gauss-node traces where low_dg / high_dg is
            set, reconstructed sub-face states elsewhere
        low_dg, high_dg: (n_faces,) DG representation of each side
        normal: axis direction of the faces
        lift: precomputed lift_matrix(ops)

    Returns:
        (sub_face_flux, lifted_flux), both (n_faces, N+1, 4)
    """
    V = ops.transfer.V_FV
    low = np.where(np.asarray(low_dg)[:, None, None], np.einsum('sj,fjv->fsv', V, low), low)
    high = np.where(np.asarray(high_dg)[:, None, None], np.einsum('sj,fjv->fsv', V, high), high)
    sub = flux_fn(low, high, normal)
    if lift is None:
        lift = lift_matrix(ops)
    lifted = np.einsum('js,fsv->fjv', lift, sub)
    return sub, lifted


def switch_elements(state: HybridState, new_flags: np.ndarray, ops: ElementOperators) -> HybridState:
    """
    Apply representation changes

    DG -> FV elements are projected to sub-cells, FV -> DG elements are
    reconstructed from their sub-cells; unchanged elements are untouched.
    An FV element whose reconstructed polynomial would be non-physical
    stays on the sub-cell grid.
    """
    new_flags = np.array(new_flags, dtype=np.int8)
    to_fv = (state.flags == Representation.DG) & (new_flags == Representation.FV)
    to_dg = (state.flags == Representation.FV) & (new_flags == Representation.DG)
    if not (np.any(to_fv) or np.any(to_dg)):
        return state

    restored = None
    if np.any(to_dg):
        restored = from_subcells(state.fields[to_dg], ops)
        p = pressure(restored, check=False)
        admissible = np.all((restored[..., 0] > 0.0) & (p > 0.0), axis=(1, 2))
        if not np.all(admissible):
            blocked = np.nonzero(to_dg)[0][~admissible]
            new_flags[blocked] = Representation.FV
            to_dg[blocked] = False
            restored = restored[admissible]
            logger.debug(f"Kept {blocked.size} element(s) on FV: DG reconstruction not admissible")

    fields = state.fields.copy()
    if np.any(to_fv):
        fields[to_fv] = to_subcells(state.fields[to_fv], ops)
    if np.any(to_dg):
        fields[to_dg] = restored
    logger.debug(f"Switched {int(np.sum(to_fv))} element(s) to FV, {int(np.sum(to_dg))} to DG")

    return HybridState(
        fields=fields,
        flags=new_flags.copy(),
        indicator_values=state.indicator_values.copy(),
        time=state.time,
        step=state.step,
    )
