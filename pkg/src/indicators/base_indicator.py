"""
Base troubled-cell indicator interface
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, Tuple

import numpy as np

from src.common.config import IndicatorConfig
from src.common.logging import get_logger
from src.common.models import HybridState, IndicatorKind
from src.numerics.basis import apply_xy, get_operators
from src.numerics.euler import pressure
from src.indicators.hysteresis import hysteresis_update


@dataclass
class IndicatorStats:
    """Statistics for indicator execution"""
    evaluations: int = 0
    elements_evaluated: int = 0
    elements_flagged: int = 0
    switches_to_fv: int = 0
    switches_to_dg: int = 0


class Indicator(ABC):
    """Abstract base class for troubled-cell indicators"""

    kind: IndicatorKind = IndicatorKind.NONE

    def __init__(self, config: IndicatorConfig, degree: int):
        """
        Initialize indicator

        Args:
            config: thresholds and the indicator variable
            degree: polynomial degree N of the solution
        """
        self.config = config
        self.degree = degree
        self.ops = get_operators(degree)
        self.stats = IndicatorStats()
        self.logger = get_logger(self.__class__.__name__)

    @abstractmethod
    def evaluate(self, nodal: np.ndarray) -> np.ndarray:
        """
        Indicator values of DG elements

        Args:
            nodal: Gauss-nodal values of the indicator variable, (n_elem, N+1, N+1)

        Returns:
            (n_elem,) indicator values
        """
        pass

    def variable(self, fields: np.ndarray) -> np.ndarray:
        """Indicator variable (density or pressure) of conservative fields"""
        if self.config.variable == "pressure":
            return pressure(fields, check=False)
        return fields[..., 0]

    def nodal_variable(self, state: HybridState) -> np.ndarray:
        """
        Indicator variable as DG nodal data for every element

        FV elements are evaluated on the polynomial they would return to.
        """
        fields = state.fields
        if np.any(state.fv_mask):
            fields = fields.copy()
            fields[state.fv_mask] = apply_xy(self.ops.transfer.V_FV_inv, fields[state.fv_mask])
        return self.variable(fields)

    def indicator_values(self, state: HybridState) -> np.ndarray:
        values = self.evaluate(self.nodal_variable(state))
        self.stats.evaluations += 1
        self.stats.elements_evaluated += values.size
        return values

    def update_flags(self, state: HybridState) -> Tuple[np.ndarray, np.ndarray]:
        """
        Indicator values and hysteresis-updated flags for a state

        Returns:
            (new_flags, values)
        """
        values = self.indicator_values(state)
        flags = hysteresis_update(state.flags, values, self.config.upper, self.config.lower)
        self.stats.elements_flagged += int(np.sum(values > self.config.upper))
        self.stats.switches_to_fv += int(np.sum(flags > state.flags))
        self.stats.switches_to_dg += int(np.sum(flags < state.flags))
        return flags, values

    def get_stats(self) -> Dict[str, Any]:
        return {
            'kind': self.kind.value,
            'evaluations': self.stats.evaluations,
            'elements_evaluated': self.stats.elements_evaluated,
            'elements_flagged': self.stats.elements_flagged,
            'switches_to_fv': self.stats.switches_to_fv,
            'switches_to_dg': self.stats.switches_to_dg,
        }

    def reset_stats(self) -> None:
        self.stats = IndicatorStats()


class NoIndicator(Indicator):
    """Never flags: pure DG"""

    kind = IndicatorKind.NONE

    def evaluate(self, nodal: np.ndarray) -> np.ndarray:
        return np.full(nodal.shape[0], -np.inf)

    def update_flags(self, state: HybridState) -> Tuple[np.ndarray, np.ndarray]:
        return state.flags, np.full(state.n_elements, -np.inf)
