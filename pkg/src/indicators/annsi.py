"""
Network-based shock indicator (ANNSI) and in-element localization (ANNSL)
"""
from typing import Tuple

import numpy as np

from src.common.config import IndicatorConfig
from src.common.exceptions import ConfigurationError
from src.common.logging import get_logger
from src.common.models import HybridState, IndicatorKind, NodeFamily
from src.indicators.base_indicator import Indicator
from src.ml.hednet import HedNetwork, annsi_flag, annsl_localize
from src.numerics.basis import get_operators
from src.solver.fvsubcell import to_subcells


def check_network(network: HedNetwork, degree: int, family: NodeFamily, role: str) -> None:
    """
    Raises:
        ConfigurationError: network degree or node family unsuitable for the role
    """
    if network.degree != degree:
        raise ConfigurationError(f"{role} network is trained for N={network.degree}, run uses N={degree}")
    if network.node_family != family:
        raise ConfigurationError(
            f"{role} network must be trained on {family.value} nodes, got {network.node_family.value}"
        )


class AnnsiIndicator(Indicator):
    """
    Element flag from the detection network

    The indicator value is 1.0 when any pixel of the predicted edge map is
    set and 0.0 otherwise; thresholds 0.5 / 0.5 turn it into a plain switch.
    """

    kind = IndicatorKind.ANNSI

    def __init__(self, config: IndicatorConfig, degree: int, network: HedNetwork, threads: int = 1):
        super().__init__(config, degree)
        check_network(network, degree, NodeFamily.GAUSS, "ANNSI")
        self.network = network
        self.threads = threads
        self.last_edge_maps = None

    def evaluate(self, nodal: np.ndarray) -> np.ndarray:
        flags, maps = annsi_flag(nodal, self.network, self.config.pixel_threshold, self.threads)
        self.last_edge_maps = maps
        return flags.astype(np.float64)


class ShockLocalizer:
    """
    Edge maps of FV elements from the localization network

    By default only elements currently on the sub-cell grid are localized;
    with all_elements every DG element is projected to sub-cells as well.
    """

    def __init__(
        self,
        network: HedNetwork,
        degree: int,
        pixel_threshold: float = 0.5,
        threads: int = 1,
        all_elements: bool = False
    ):
        check_network(network, degree, NodeFamily.EQUISPACED, "ANNSL")
        self.network = network
        self.ops = get_operators(degree)
        self.pixel_threshold = pixel_threshold
        self.threads = threads
        self.all_elements = all_elements
        self.logger = get_logger("ShockLocalizer")

    def subcell_density(self, state: HybridState) -> Tuple[np.ndarray, np.ndarray]:
        """(element ids, sub-cell density) of the elements to localize"""
        if self.all_elements:
            elements = np.arange(state.n_elements)
        else:
            elements = np.nonzero(state.fv_mask)[0]
        fields = state.fields[elements]
        dg = ~state.fv_mask[elements]
        if np.any(dg):
            fields = fields.copy()
            fields[dg] = to_subcells(fields[dg], self.ops)
        return elements, fields[..., 0]

    def localize(self, state: HybridState) -> Tuple[np.ndarray, np.ndarray]:
        """
        Returns:
            (element ids, binary edge maps (k, N+1, N+1))
        """
        elements, density = self.subcell_density(state)
        maps = annsl_localize(density, self.network, self.pixel_threshold, self.threads)
        self.logger.debug(f"Localized {len(elements)} element(s), {int(np.sum(np.any(maps, axis=(1, 2))))} with edges")
        return elements, maps
