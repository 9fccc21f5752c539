"""
Hysteresis switching between DG and FV representations
"""
import numpy as np

from src.common.models import Representation


def hysteresis_update(current, value, upper: float, lower: float):
    """
    New representation flag(s)

    DG switches to FV only when value > upper, FV returns to DG only when
    value < lower; inside the dead band the flag is kept. Works on scalars
    and arrays alike.
    """
    current = np.asarray(current)
    value = np.asarray(value, dtype=np.float64)
    to_fv = (current == Representation.DG) & (value > upper)
    to_dg = (current == Representation.FV) & (value < lower)
    updated = np.where(to_fv, Representation.FV, np.where(to_dg, Representation.DG, current)).astype(np.int8)
    if updated.ndim == 0:
        return Representation(int(updated))
    return updated
