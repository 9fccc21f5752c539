"""
Polynomial bases and Euler physics
"""
from src.numerics.basis import (
    ElementOperators,
    NodalBasis1D,
    TransferMatrices,
    build_degree_projection,
    build_fv_projection,
    build_modal_transform,
    gauss_nodes,
    get_operators,
)
from src.numerics.euler import (
    GAMMA,
    cons_to_prim,
    hlle_flux,
    max_wavespeed,
    physical_flux,
    post_shock_state,
    pressure,
    prim_to_cons,
    roe_flux,
)
from src.numerics.exact_riemann import ExactRiemannSolver, PrimState1D

__all__ = [
    'ElementOperators',
    'NodalBasis1D',
    'TransferMatrices',
    'build_degree_projection',
    'build_fv_projection',
    'build_modal_transform',
    'gauss_nodes',
    'get_operators',
    'GAMMA',
    'cons_to_prim',
    'hlle_flux',
    'max_wavespeed',
    'physical_flux',
    'post_shock_state',
    'pressure',
    'prim_to_cons',
    'roe_flux',
    'ExactRiemannSolver',
    'PrimState1D',
]
