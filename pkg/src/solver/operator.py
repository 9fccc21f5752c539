"""
Hybrid DG/FV spatial operator

Evaluates dU/dt for a field where every element is either a DGSEM element
(Gauss-nodal values) or an FV element (sub-cell means). Each interior face
flux is computed once and scattered to both neighbors:

* DG | DG   Riemann flux at the face Gauss points
* otherwise Riemann flux per sub-face; DG sides are projected to sub-face
            means and receive the conservative lift of the sub-face fluxes
"""
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.common.exceptions import ConfigurationError, InvalidStateError, PositivityError
from src.common.logging import get_logger
from src.common.models import HybridState
from src.numerics.basis import get_operators, subcell_centers
from src.numerics.euler import FluxFunction, pressure
from src.solver.boundary import BoundarySet
from src.solver.dgsem import dg_surface_rhs, dg_volume_rhs, element_traces
from src.solver.fvsubcell import (
    X_NORMAL,
    Y_NORMAL,
    FaceStates,
    fv_update,
    lift_matrix,
    mixed_interface_flux,
    reconstruct,
)
from src.solver.mesh import EAST, FACE_NORMALS, NORTH, OPPOSITE, SOUTH, WEST, Mesh2D


@dataclass
class OperatorStats:
    """Operator evaluation statistics"""
    evaluations: int = 0
    mixed_faces: int = 0
    fv_elements: int = 0


@dataclass
class _BoundaryGroup:
    side: int
    tag: str
    elements: np.ndarray
    gauss_xy: tuple
    subcell_xy: tuple


class HybridOperator:
    """
    Spatial operator of the hybrid DG/FV sub-cell scheme

    Example:
        operator = HybridOperator(mesh, degree=5, boundaries=bcs, flux_fn=roe)
        dUdt = operator(state.fields, state.fv_mask, state.time)
    """

    def __init__(self, mesh: Mesh2D, degree: int, boundaries: BoundarySet, flux_fn: FluxFunction):
        self.mesh = mesh
        self.degree = degree
        self.ops = get_operators(degree)
        self.boundaries = boundaries
        self.flux_fn = flux_fn
        self.stats = OperatorStats()
        self.logger = get_logger(self.__class__.__name__)

        boundaries.validate(group.tag for group in mesh.boundary_faces)
        self._lift = lift_matrix(self.ops)
        centers = subcell_centers(degree)
        self._groups: List[_BoundaryGroup] = []
        for group in mesh.boundary_faces:
            self._groups.append(_BoundaryGroup(
                side=group.side,
                tag=group.tag,
                elements=group.elements,
                gauss_xy=mesh.face_coordinates(group.elements, group.side, self.ops.nodes),
                subcell_xy=mesh.face_coordinates(group.elements, group.side, centers),
            ))

    # ------------------------------------------------------------------

    def __call__(self, U: np.ndarray, fv_mask: np.ndarray, t: float) -> np.ndarray:
        """
        Time derivative of the hybrid field

        Raises:
            PositivityError: non-physical state in a node, sub-cell or trace
        """
        self.check_admissible(U, fv_mask, t)
        try:
            return self._evaluate(U, np.asarray(fv_mask, dtype=bool), t)
        except InvalidStateError as e:
            element = self._locate_trace_failure(U, fv_mask)
            raise PositivityError(
                f"Non-physical state at t={t:.6g}" + (f" near element {element}" if element is not None else "")
                + f": {e}",
                element=element,
                time=t,
            ) from e

    def check_admissible(self, U: np.ndarray, fv_mask: np.ndarray, t: float) -> None:
        """Raise PositivityError naming the first element with rho <= 0 or p <= 0"""
        p = pressure(U, check=False)
        bad = ~((U[..., 0] > 0.0) & (p > 0.0))
        if not np.any(bad):
            return
        element, i, j = (int(k) for k in np.argwhere(bad)[0])
        subcell = (i, j) if fv_mask[element] else None
        kind = "sub-cell" if subcell else "node"
        raise PositivityError(
            f"Positivity failure in element {element} ({kind} {i},{j}) at t={t:.6g}",
            element=element,
            time=t,
            subcell=subcell,
        )

    def _locate_trace_failure(self, U: np.ndarray, fv_mask: np.ndarray) -> Optional[int]:
        traces = element_traces(U, self.ops)
        for side in (WEST, EAST, SOUTH, NORTH):
            tr = traces[side]
            p = pressure(tr, check=False)
            bad = ~((tr[..., 0] > 0.0) & (p > 0.0)) & ~np.asarray(fv_mask, dtype=bool)[:, None]
            if np.any(bad):
                return int(np.argwhere(bad)[0][0])
        return None

    # ------------------------------------------------------------------

    def _evaluate(self, U: np.ndarray, fv: np.ndarray, t: float) -> np.ndarray:
        mesh = self.mesh
        ops = self.ops
        flux = self.flux_fn
        n_elem, n = U.shape[0], U.shape[1]
        dg = ~fv
        any_fv = bool(np.any(fv))
        self.stats.evaluations += 1
        self.stats.fv_elements = int(np.sum(fv))

        traces = element_traces(U, ops)
        dg_face = {side: np.zeros((n_elem, n, 4)) for side in range(4)}
        fv_face = {side: np.zeros((n_elem, n, 4)) for side in range(4)} if any_fv else None

        fv_ids = np.nonzero(fv)[0]
        states: Optional[FaceStates] = None
        if any_fv:
            states = self._reconstruct_fv(U, fv, fv_ids, t)
            position = np.full(n_elem, -1)
            position[fv_ids] = np.arange(fv_ids.size)

        def face_values(side: int, elems: np.ndarray) -> np.ndarray:
            """Gauss traces of DG elements, reconstructed sub-face states of FV elements"""
            values = traces[side][elems].copy()
            on_fv = fv[elems]
            values[on_fv] = states.boundary(side)[position[elems[on_fv]]]
            return values

        mixed = 0
        for low_side, high_side, low, high, normal in (
            (EAST, WEST, mesh.x_face_left, mesh.x_face_right, X_NORMAL),
            (NORTH, SOUTH, mesh.y_face_bottom, mesh.y_face_top, Y_NORMAL),
        ):
            both_dg = dg[low] & dg[high]
            if np.any(both_dg):
                a, b = low[both_dg], high[both_dg]
                f = flux(traces[low_side][a], traces[high_side][b], normal)
                dg_face[low_side][a] = f
                dg_face[high_side][b] = f
            if any_fv and not np.all(both_dg):
                a, b = low[~both_dg], high[~both_dg]
                mixed += a.size
                sub, lifted = mixed_interface_flux(
                    face_values(low_side, a), face_values(high_side, b), dg[a], dg[b],
                    ops, flux, normal, lift=self._lift,
                )
                fv_face[low_side][a] = sub
                fv_face[high_side][b] = sub
                dg_face[low_side][a] = lifted
                dg_face[high_side][b] = lifted
        self.stats.mixed_faces = mixed

        for group in self._groups:
            side = group.side
            normal = FACE_NORMALS[side]
            axis = X_NORMAL if side in (WEST, EAST) else Y_NORMAL
            outward_positive = side in (EAST, NORTH)

            on_dg = dg[group.elements]
            if np.any(on_dg):
                elems = group.elements[on_dg]
                w_in = traces[side][elems]
                x, y = group.gauss_xy[0][on_dg], group.gauss_xy[1][on_dg]
                w_out = self.boundaries.apply_bc(w_in, group.tag, normal, x, y, t)
                dg_face[side][elems] = flux(w_in, w_out, axis) if outward_positive else flux(w_out, w_in, axis)
            if any_fv and not np.all(on_dg):
                on_fv = ~on_dg
                elems = group.elements[on_fv]
                w_in = states.boundary(side)[position[elems]]
                x, y = group.subcell_xy[0][on_fv], group.subcell_xy[1][on_fv]
                w_out = self.boundaries.apply_bc(w_in, group.tag, normal, x, y, t)
                fv_face[side][elems] = flux(w_in, w_out, axis) if outward_positive else flux(w_out, w_in, axis)

        rhs = np.empty_like(U)
        if np.any(dg):
            dx, dy = mesh.dx[dg], mesh.dy[dg]
            rhs[dg] = dg_volume_rhs(U[dg], ops, dx, dy) + dg_surface_rhs(
                {side: dg_face[side][dg] for side in range(4)}, ops, dx, dy
            )
        if any_fv:
            rhs[fv_ids] = fv_update(
                states,
                {side: fv_face[side][fv_ids] for side in range(4)},
                mesh.dx[fv_ids],
                mesh.dy[fv_ids],
                flux,
            )
        return rhs

    def _reconstruct_fv(self, U: np.ndarray, fv: np.ndarray, fv_ids: np.ndarray, t: float) -> FaceStates:
        """MUSCL states of the FV elements with ghost layers from neighbors or boundary conditions"""
        V = self.ops.transfer.V_FV
        # adjacent sub-cell layer of every element in FV representation
        layers = {
            WEST: np.einsum('kj,ejv->ekv', V, np.einsum('i,eijv->ejv', V[0], U)),
            EAST: np.einsum('kj,ejv->ekv', V, np.einsum('i,eijv->ejv', V[-1], U)),
            SOUTH: np.einsum('ki,eiv->ekv', V, np.einsum('j,eijv->eiv', V[0], U)),
            NORTH: np.einsum('ki,eiv->ekv', V, np.einsum('j,eijv->eiv', V[-1], U)),
        }
        layers[WEST][fv] = U[fv, 0]
        layers[EAST][fv] = U[fv, -1]
        layers[SOUTH][fv] = U[fv, :, 0]
        layers[NORTH][fv] = U[fv, :, -1]

        ghosts = {}
        for side in range(4):
            nb = self.mesh.neighbors[fv_ids, side]
            ghost = np.empty((fv_ids.size,) + layers[side].shape[1:])
            interior = nb >= 0
            ghost[interior] = layers[OPPOSITE[side]][nb[interior]]
            ghosts[side] = ghost

        # boundary ghosts from the condition applied to the adjacent layer
        position = np.full(self.mesh.n_elements, -1)
        position[fv_ids] = np.arange(fv_ids.size)
        for group in self._groups:
            on_fv = fv[group.elements]
            if not np.any(on_fv):
                continue
            elems = group.elements[on_fv]
            x, y = group.subcell_xy[0][on_fv], group.subcell_xy[1][on_fv]
            w_out = self.boundaries.apply_bc(
                layers[group.side][elems], group.tag, FACE_NORMALS[group.side], x, y, t
            )
            ghosts[group.side][position[elems]] = w_out

        return reconstruct(U[fv_ids], ghosts)


def dg_rhs(state: HybridState, operator: HybridOperator) -> np.ndarray:
    """
    dU/dt of a pure DG state

    Raises:
        ConfigurationError: the state contains FV elements
    """
    if np.any(state.fv_mask):
        raise ConfigurationError("dg_rhs requires every element in DG representation")
    return operator(state.fields, state.fv_mask, state.time)
