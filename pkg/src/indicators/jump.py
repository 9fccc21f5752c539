"""
Jump indicator

    I = (1/V_E) sum_ij (w_min - 2w + w_max) / (w_min + 2w + w_max) V_ij

w_min / w_max are taken over the in-element nodes at offsets +-1 and +-2
along each axis; sub-cell volumes are uniform, V_ij / V_E = 1/(N+1)^2.
"""
import numpy as np

from src.common.models import IndicatorKind
from src.indicators.base_indicator import Indicator

OFFSETS = ((1, 0), (-1, 0), (2, 0), (-2, 0), (0, 1), (0, -1), (0, 2), (0, -2))


def neighbor_extrema(values: np.ndarray):
    """Min and max over the clipped axis-aligned stencil, self excluded"""
    n_elem, nx, ny = values.shape
    padded = np.full((n_elem, nx + 4, ny + 4), np.nan)
    padded[:, 2:-2, 2:-2] = values
    shifted = np.stack([
        padded[:, 2 + di: 2 + di + nx, 2 + dj: 2 + dj + ny] for di, dj in OFFSETS
    ])
    return np.nanmin(shifted, axis=0), np.nanmax(shifted, axis=0)


def jump_indicator(nodal: np.ndarray) -> np.ndarray:
    """Jump indicator per element of positive (n_elem, N+1, N+1) data"""
    nodal = np.asarray(nodal, dtype=np.float64)
    single = nodal.ndim == 2
    if single:
        nodal = nodal[None]
    w_min, w_max = neighbor_extrema(nodal)
    ratio = (w_min - 2.0 * nodal + w_max) / (w_min + 2.0 * nodal + w_max)
    value = np.mean(ratio, axis=(1, 2))
    return value[0] if single else value


class JumpIndicator(Indicator):
    """Jump indicator with hysteresis thresholds"""

    kind = IndicatorKind.JUMP

    def evaluate(self, nodal: np.ndarray) -> np.ndarray:
        return jump_indicator(nodal)
