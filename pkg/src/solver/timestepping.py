"""
Explicit low-storage Runge-Kutta time integration

Five-stage, fourth-order 2N-storage scheme of Carpenter and Kennedy.
"""
from typing import Callable

import numpy as np

from src.common.exceptions import ConfigurationError
from src.common.models import HybridState

RK_A = (
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
)
RK_B = (
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
)
RK_C = (
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
)

RhsFunction = Callable[[np.ndarray, float], np.ndarray]


def lsrk_advance(y: np.ndarray, rhs_fn: RhsFunction, t: float, dt: float) -> np.ndarray:
    """Advance an array y' = rhs(y, t) by one step"""
    if not dt > 0.0:
        raise ConfigurationError(f"Time step must be positive, got {dt}")
    y = np.array(y, dtype=np.float64, copy=True)
    residual = np.zeros_like(y)
    for a, b, c in zip(RK_A, RK_B, RK_C):
        residual = a * residual + dt * rhs_fn(y, t + c * dt)
        y += b * residual
    return y


def rk_step(state: HybridState, rhs_fn: RhsFunction, dt: float) -> HybridState:
    """
    One LSRK(5,4) step of a hybrid state

    Flags stay frozen during the step; rhs_fn(fields, t) sees the state's flags.
    """
    fields = lsrk_advance(state.fields, rhs_fn, state.time, dt)
    return HybridState(
        fields=fields,
        flags=state.flags,
        indicator_values=state.indicator_values,
        time=state.time + dt,
        step=state.step + 1,
    )
