"""
Hybrid DG/FV solver on Cartesian multi-block meshes
"""
from src.solver.boundary import (
    BoundaryCondition,
    BoundarySet,
    CompositeBoundary,
    DirichletBoundary,
    OutflowBoundary,
    SlipWallBoundary,
    make_boundary,
)
from src.solver.dgsem import compute_dt
from src.solver.fvsubcell import from_subcells, mixed_interface_flux, switch_elements, to_subcells
from src.solver.mesh import Block, Mesh2D
from src.solver.operator import HybridOperator, dg_rhs
from src.solver.timestepping import rk_step

__all__ = [
    'BoundaryCondition',
    'BoundarySet',
    'CompositeBoundary',
    'DirichletBoundary',
    'OutflowBoundary',
    'SlipWallBoundary',
    'make_boundary',
    'compute_dt',
    'from_subcells',
    'mixed_interface_flux',
    'switch_elements',
    'to_subcells',
    'Block',
    'Mesh2D',
    'HybridOperator',
    'dg_rhs',
    'rk_step',
]
