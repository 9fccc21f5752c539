"""
DGSEM element kernels on Cartesian elements

Weak-form collocation on Legendre-Gauss nodes:

    dU/dt = -(2/dx) [D_hat F + (l(+1) F*_east - l(-1) F*_west) / w]
            -(2/dy) [D_hat G + (l(+1) G*_north - l(-1) G*_south) / w]

with D_hat[i, j] = -(w_j / w_i) D[j, i]. Fields are (n_elem, N+1, N+1, 4).
"""
from typing import Dict

import numpy as np

from src.common.exceptions import PositivityError
from src.numerics.basis import ElementOperators, apply_x, apply_y
from src.numerics.euler import flux_x, flux_y, max_wavespeed, pressure
from src.solver.mesh import EAST, NORTH, SOUTH, WEST


def element_traces(U: np.ndarray, ops: ElementOperators) -> Dict[int, np.ndarray]:
    """
    Interpolated face traces per side

    West/east traces are indexed by the y node j, south/north by the x node i;
    each is shaped (n_elem, N+1, 4).
    """
    return {
        WEST: np.einsum('i,eijv->ejv', ops.ell_minus, U),
        EAST: np.einsum('i,eijv->ejv', ops.ell_plus, U),
        SOUTH: np.einsum('j,eijv->eiv', ops.ell_minus, U),
        NORTH: np.einsum('j,eijv->eiv', ops.ell_plus, U),
    }


def dg_volume_rhs(U: np.ndarray, ops: ElementOperators, dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """Volume part -(2/dx) D_hat F - (2/dy) D_hat G"""
    p = pressure(U)
    F = flux_x(U, p)
    G = flux_y(U, p)
    sx = (2.0 / dx)[:, None, None, None]
    sy = (2.0 / dy)[:, None, None, None]
    return -sx * apply_x(ops.D_hat, F) - sy * apply_y(ops.D_hat, G)


def dg_surface_rhs(
    face_flux: Dict[int, np.ndarray],
    ops: ElementOperators,
    dx: np.ndarray,
    dy: np.ndarray
) -> np.ndarray:
    """
    Surface part from axis-direction numerical fluxes at the face Gauss points

    face_flux[WEST]/[EAST] carry the x flux, [SOUTH]/[NORTH] the y flux,
    each (n_elem, N+1, 4).
    """
    w = ops.weights
    lp = ops.ell_plus
    lm = ops.ell_minus
    surf_x = (lp[None, :, None, None] * face_flux[EAST][:, None, :, :]
              - lm[None, :, None, None] * face_flux[WEST][:, None, :, :]) / w[None, :, None, None]
    surf_y = (lp[None, None, :, None] * face_flux[NORTH][:, :, None, :]
              - lm[None, None, :, None] * face_flux[SOUTH][:, :, None, :]) / w[None, None, :, None]
    return -(2.0 / dx)[:, None, None, None] * surf_x - (2.0 / dy)[:, None, None, None] * surf_y


def compute_dt(fields: np.ndarray, dx: np.ndarray, dy: np.ndarray, cfl: float, time: float = 0.0) -> float:
    """
    dt = cfl * min_e min(dx_e, dy_e) / ((2N+1) * lambda_max,e)

    Raises:
        PositivityError: non-finite or non-positive wave speed anywhere
    """
    degree = fields.shape[1] - 1
    speeds = max_wavespeed(fields, check=False)
    lam = np.max(speeds.reshape(fields.shape[0], -1), axis=1)
    bad = ~np.isfinite(lam) | (lam <= 0.0)
    if np.any(bad):
        element = int(np.nonzero(bad)[0][0])
        raise PositivityError(
            f"Non-finite wave speed in element {element} at t={time:.6g}",
            element=element,
            time=time,
        )
    h = np.minimum(dx, dy) / (2 * degree + 1)
    return float(cfl * np.min(h / lam))
