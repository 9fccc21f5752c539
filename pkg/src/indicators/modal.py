"""
Modal smoothness indicator

Relative energy of the highest Legendre modes:

    I = log10 max_{i in {N-2, N-1, N}} ||[w]_i^i||^2 / ||[w]_0^i||^2

with [w]_a^b the 2D orthonormal coefficients on shells max(kx, ky) in [a, b].
"""
import numpy as np

from src.common.models import IndicatorKind
from src.indicators.base_indicator import Indicator
from src.numerics.basis import ElementOperators, apply_xy

FLOOR = -16.0
DENOMINATOR_FLOOR = 1e-30


def modal_coefficients(nodal: np.ndarray, ops: ElementOperators) -> np.ndarray:
    """2D orthonormal Legendre coefficients of (n_elem, N+1, N+1) nodal data"""
    return apply_xy(ops.transfer.modal_fwd, nodal)


def modal_indicator(nodal: np.ndarray, ops: ElementOperators) -> np.ndarray:
    """
    Modal indicator per element

    A zero numerator gives the floor value -16; the denominator is floored
    at 1e-30.
    """
    nodal = np.asarray(nodal, dtype=np.float64)
    single = nodal.ndim == 2
    if single:
        nodal = nodal[None]
    N = ops.degree
    energy = modal_coefficients(nodal, ops) ** 2
    k = np.arange(N + 1)
    shell = np.maximum(k[:, None], k[None, :])

    best = np.full(nodal.shape[0], FLOOR)
    for i in range(max(N - 2, 1), N + 1):
        numerator = np.sum(energy[:, shell == i], axis=1)
        denominator = np.maximum(np.sum(energy[:, shell <= i], axis=1), DENOMINATOR_FLOOR)
        with np.errstate(divide='ignore'):
            value = np.where(numerator > 0.0, np.log10(numerator / denominator), FLOOR)
        best = np.maximum(best, value)
    best = np.maximum(best, FLOOR)
    return best[0] if single else best


class ModalIndicator(Indicator):
    """Modal indicator with hysteresis thresholds"""

    kind = IndicatorKind.MODAL

    def evaluate(self, nodal: np.ndarray) -> np.ndarray:
        return modal_indicator(nodal, self.ops)
