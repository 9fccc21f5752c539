"""
Compressible Euler physics for a perfect gas

States are arrays whose last axis holds (rho, rho*u, rho*v, E). Normals
are unit vectors broadcastable against the leading axes, last axis (nx, ny).
"""
from typing import Callable, Union

import numpy as np

from src.common.exceptions import ConfigurationError, InvalidStateError
from src.common.models import FluxKind

GAMMA = 1.4

ArrayLike = Union[np.ndarray, tuple, list]
FluxFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


def _invalid(message: str, w: np.ndarray, bad: np.ndarray) -> InvalidStateError:
    return InvalidStateError(message, states=np.asarray(w)[bad][:8].copy())


def pressure(w: np.ndarray, check: bool = True) -> np.ndarray:
    """
    p = (gamma-1) (E - rho |u|^2 / 2)

    Raises:
        InvalidStateError: rho <= 0 or p <= 0 somewhere (when check is set)
    """
    w = np.asarray(w, dtype=np.float64)
    rho = w[..., 0]
    p = (GAMMA - 1.0) * (w[..., 3] - 0.5 * (w[..., 1] ** 2 + w[..., 2] ** 2) / rho)
    if check:
        bad = ~((rho > 0.0) & (p > 0.0))
        if np.any(bad):
            raise _invalid("Non-physical state: rho <= 0 or p <= 0", w, bad)
    return p


def cons_to_prim(w: np.ndarray, check: bool = True) -> np.ndarray:
    """(rho, rho*u, rho*v, E) -> (rho, u, v, p)"""
    w = np.asarray(w, dtype=np.float64)
    p = pressure(w, check=check)
    prim = np.empty_like(w)
    prim[..., 0] = w[..., 0]
    prim[..., 1] = w[..., 1] / w[..., 0]
    prim[..., 2] = w[..., 2] / w[..., 0]
    prim[..., 3] = p
    return prim


def prim_to_cons(q: ArrayLike) -> np.ndarray:
    """(rho, u, v, p) -> (rho, rho*u, rho*v, E)"""
    q = np.asarray(q, dtype=np.float64)
    w = np.empty_like(q)
    rho = q[..., 0]
    w[..., 0] = rho
    w[..., 1] = rho * q[..., 1]
    w[..., 2] = rho * q[..., 2]
    w[..., 3] = q[..., 3] / (GAMMA - 1.0) + 0.5 * rho * (q[..., 1] ** 2 + q[..., 2] ** 2)
    return w


def sound_speed(w: np.ndarray, check: bool = True) -> np.ndarray:
    return np.sqrt(GAMMA * pressure(w, check=check) / w[..., 0])


def max_wavespeed(w: np.ndarray, check: bool = True) -> np.ndarray:
    """max(|u|, |v|) + c"""
    w = np.asarray(w, dtype=np.float64)
    c = sound_speed(w, check=check)
    u = np.abs(w[..., 1] / w[..., 0])
    v = np.abs(w[..., 2] / w[..., 0])
    return np.maximum(u, v) + c


def flux_x(w: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Cartesian x flux given the pressure"""
    u = w[..., 1] / w[..., 0]
    f = np.empty_like(w)
    f[..., 0] = w[..., 1]
    f[..., 1] = w[..., 1] * u + p
    f[..., 2] = w[..., 2] * u
    f[..., 3] = (w[..., 3] + p) * u
    return f


def flux_y(w: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Cartesian y flux given the pressure"""
    v = w[..., 2] / w[..., 0]
    g = np.empty_like(w)
    g[..., 0] = w[..., 2]
    g[..., 1] = w[..., 1] * v
    g[..., 2] = w[..., 2] * v + p
    g[..., 3] = (w[..., 3] + p) * v
    return g


def physical_flux(w: np.ndarray, normal: ArrayLike) -> np.ndarray:
    """Directional flux F(w) . n"""
    w = np.asarray(w, dtype=np.float64)
    n = np.asarray(normal, dtype=np.float64)
    p = pressure(w)
    return flux_x(w, p) * n[..., 0:1] + flux_y(w, p) * n[..., 1:2]


def _rotate(w: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Momentum into the (normal, tangential) frame"""
    nx = n[..., 0]
    ny = n[..., 1]
    rotated = np.empty(np.broadcast_shapes(w.shape, n.shape[:-1] + (4,)))
    rotated[..., 0] = w[..., 0]
    rotated[..., 1] = w[..., 1] * nx + w[..., 2] * ny
    rotated[..., 2] = -w[..., 1] * ny + w[..., 2] * nx
    rotated[..., 3] = w[..., 3]
    return rotated


def _rotate_back(f: np.ndarray, n: np.ndarray) -> np.ndarray:
    nx = n[..., 0]
    ny = n[..., 1]
    out = np.empty_like(f)
    out[..., 0] = f[..., 0]
    out[..., 1] = f[..., 1] * nx - f[..., 2] * ny
    out[..., 2] = f[..., 1] * ny + f[..., 2] * nx
    out[..., 3] = f[..., 3]
    return out


def _roe_average(rL, uL, vL, HL, rR, uR, vR, HR):
    sL = np.sqrt(rL)
    sR = np.sqrt(rR)
    inv = 1.0 / (sL + sR)
    u = (sL * uL + sR * uR) * inv
    v = (sL * vL + sR * vR) * inv
    H = (sL * HL + sR * HR) * inv
    return u, v, H, sL * sR


def roe_flux(
    wL: np.ndarray,
    wR: np.ndarray,
    normal: ArrayLike,
    entropy_fix: bool = True,
    delta_factor: float = 0.05
) -> np.ndarray:
    """
    Roe flux in the face-normal frame

    The Harten-Hyman fix with delta = delta_factor * (|u| + c) of the Roe
    average is applied to the two acoustic waves when entropy_fix is set.

    Raises:
        InvalidStateError: non-physical input or imaginary Roe sound speed
    """
    n = np.asarray(normal, dtype=np.float64)
    qL = _rotate(np.asarray(wL, dtype=np.float64), n)
    qR = _rotate(np.asarray(wR, dtype=np.float64), n)
    pL = pressure(qL)
    pR = pressure(qR)

    rL, rR = qL[..., 0], qR[..., 0]
    uL, uR = qL[..., 1] / rL, qR[..., 1] / rR
    vL, vR = qL[..., 2] / rL, qR[..., 2] / rR
    HL = (qL[..., 3] + pL) / rL
    HR = (qR[..., 3] + pR) / rR

    u, v, H, rho = _roe_average(rL, uL, vL, HL, rR, uR, vR, HR)
    c2 = (GAMMA - 1.0) * (H - 0.5 * (u * u + v * v))
    if np.any(c2 <= 0.0):
        raise _invalid("Roe average has non-positive squared sound speed", qL, c2 <= 0.0)
    c = np.sqrt(c2)

    dp = pR - pL
    du = uR - uL
    dv = vR - vL
    drho = rR - rL
    alpha1 = (dp - rho * c * du) / (2.0 * c2)
    alpha2 = rho * dv / c
    alpha3 = drho - dp / c2
    alpha4 = (dp + rho * c * du) / (2.0 * c2)

    lam1 = np.abs(u - c)
    lam2 = np.abs(u)
    lam4 = np.abs(u + c)
    if entropy_fix:
        delta = delta_factor * (np.abs(u) + c)
        lam1 = np.where(lam1 < delta, (lam1 * lam1 + delta * delta) / (2.0 * delta), lam1)
        lam4 = np.where(lam4 < delta, (lam4 * lam4 + delta * delta) / (2.0 * delta), lam4)

    k1 = lam1 * alpha1
    k2 = lam2 * alpha2
    k3 = lam2 * alpha3
    k4 = lam4 * alpha4
    diss = np.empty_like(qL)
    diss[..., 0] = k1 + k3 + k4
    diss[..., 1] = (u - c) * k1 + u * k3 + (u + c) * k4
    diss[..., 2] = v * k1 + c * k2 + v * k3 + v * k4
    diss[..., 3] = (H - u * c) * k1 + v * c * k2 + 0.5 * (u * u + v * v) * k3 + (H + u * c) * k4

    f = 0.5 * (flux_x(qL, pL) + flux_x(qR, pR) - diss)
    return _rotate_back(f, n)


def hlle_flux(wL: np.ndarray, wR: np.ndarray, normal: ArrayLike) -> np.ndarray:
    """HLLE flux with Einfeldt wave-speed estimates"""
    n = np.asarray(normal, dtype=np.float64)
    qL = _rotate(np.asarray(wL, dtype=np.float64), n)
    qR = _rotate(np.asarray(wR, dtype=np.float64), n)
    pL = pressure(qL)
    pR = pressure(qR)

    rL, rR = qL[..., 0], qR[..., 0]
    uL, uR = qL[..., 1] / rL, qR[..., 1] / rR
    vL, vR = qL[..., 2] / rL, qR[..., 2] / rR
    HL = (qL[..., 3] + pL) / rL
    HR = (qR[..., 3] + pR) / rR
    cL = np.sqrt(GAMMA * pL / rL)
    cR = np.sqrt(GAMMA * pR / rR)

    u, v, H, _ = _roe_average(rL, uL, vL, HL, rR, uR, vR, HR)
    c2 = (GAMMA - 1.0) * (H - 0.5 * (u * u + v * v))
    if np.any(c2 <= 0.0):
        raise _invalid("Roe average has non-positive squared sound speed", qL, c2 <= 0.0)
    c = np.sqrt(c2)

    sL = np.minimum(uL - cL, u - c)[..., None]
    sR = np.maximum(uR + cR, u + c)[..., None]
    fL = flux_x(qL, pL)
    fR = flux_x(qR, pR)

    with np.errstate(divide='ignore', invalid='ignore'):
        middle = (sR * fL - sL * fR + sL * sR * (qR - qL)) / (sR - sL)
    f = np.where(sL >= 0.0, fL, np.where(sR <= 0.0, fR, middle))
    return _rotate_back(f, n)


def get_flux_function(kind: FluxKind, entropy_fix: bool = True, delta_factor: float = 0.05) -> FluxFunction:
    """Numerical flux selected by kind"""
    kind = FluxKind(kind)
    if kind == FluxKind.ROE:
        def flux(wL, wR, normal):
            return roe_flux(wL, wR, normal, entropy_fix=entropy_fix, delta_factor=delta_factor)
        return flux
    if kind == FluxKind.HLLE:
        return hlle_flux
    raise ConfigurationError(f"Unknown flux kind: {kind}")


def post_shock_state(mach: float, rho1: float = 1.4, p1: float = 1.0):
    """
    Rankine-Hugoniot state behind a normal shock moving into gas at rest

    Returns:
        (rho2, speed2, p2, shock_speed): post-shock density, gas speed in the
        shock-travel direction, pressure and shock speed
    """
    c1 = np.sqrt(GAMMA * p1 / rho1)
    m2 = mach * mach
    rho2 = rho1 * (GAMMA + 1.0) * m2 / ((GAMMA - 1.0) * m2 + 2.0)
    p2 = p1 * (2.0 * GAMMA * m2 - (GAMMA - 1.0)) / (GAMMA + 1.0)
    shock_speed = mach * c1
    speed2 = shock_speed * (1.0 - rho1 / rho2)
    return float(rho2), float(speed2), float(p2), float(shock_speed)
