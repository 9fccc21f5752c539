"""
Simulation orchestration
"""
from .simulation import Simulation
from .simulation_core import apply_indicator, evaluate_indicators, make_snapshot

__all__ = ['Simulation', 'apply_indicator', 'evaluate_indicators', 'make_snapshot']
