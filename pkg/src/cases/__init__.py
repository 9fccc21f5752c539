"""
Test case definitions
"""
from src.cases.definitions import (
    CaseSpec,
    double_mach,
    forward_step,
    get_case,
    isentropic_vortex,
    list_cases,
    riemann2d,
    sod_strip,
    stationary_shock,
)

__all__ = [
    'CaseSpec',
    'double_mach',
    'forward_step',
    'get_case',
    'isentropic_vortex',
    'list_cases',
    'riemann2d',
    'sod_strip',
    'stationary_shock',
]
