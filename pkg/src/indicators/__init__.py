"""
Troubled-cell indicators, hysteresis switching and refinement planning
"""
from typing import Optional

from src.common.config import IndicatorConfig
from src.common.exceptions import ConfigurationError
from src.common.models import IndicatorKind
from .base_indicator import Indicator, IndicatorStats, NoIndicator
from .hysteresis import hysteresis_update
from .jump import JumpIndicator, jump_indicator
from .modal import ModalIndicator, modal_indicator
from .meshref import build_refine_plan, meshref_indicator, refinement_factors


def create_indicator(config: IndicatorConfig, degree: int, network=None, threads: int = 1) -> Indicator:
    """
    Indicator instance for a configuration

    Raises:
        ConfigurationError: ANNSI requested without a network
    """
    kind = IndicatorKind(config.kind)
    if kind == IndicatorKind.MODAL:
        return ModalIndicator(config, degree)
    if kind == IndicatorKind.JUMP:
        return JumpIndicator(config, degree)
    if kind == IndicatorKind.ANNSI:
        if network is None:
            raise ConfigurationError("The annsi indicator needs a trained network")
        from .annsi import AnnsiIndicator
        return AnnsiIndicator(config, degree, network, threads)
    return NoIndicator(config, degree)


__all__ = [
    'Indicator',
    'IndicatorStats',
    'NoIndicator',
    'ModalIndicator',
    'JumpIndicator',
    'create_indicator',
    'hysteresis_update',
    'modal_indicator',
    'jump_indicator',
    'meshref_indicator',
    'build_refine_plan',
    'refinement_factors',
]
