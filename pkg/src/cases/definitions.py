"""
Canonical test cases

Each case bundles a mesh layout, an initializer returning primitive
states (rho, u, v, p), boundary conditions by tag, an end time and the
default numerical flux.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.common.exceptions import ConfigurationError
from src.common.models import FluxKind, HybridState
from src.numerics.basis import get_operators
from src.numerics.euler import GAMMA, post_shock_state, prim_to_cons
from src.solver.boundary import (
    BoundaryCondition,
    BoundarySet,
    CompositeBoundary,
    DirichletBoundary,
    OutflowBoundary,
    SlipWallBoundary,
)
from src.solver.mesh import Block, Mesh2D

PrimInitializer = Callable[[np.ndarray, np.ndarray], np.ndarray]
ExactSolution = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass
class CaseSpec:
    """Definition of a test case"""
    name: str
    domain: Tuple[float, float, float, float]
    blocks: List[Block]
    initializer: PrimInitializer
    boundaries: Dict[str, BoundaryCondition]
    t_end: float
    flux: FluxKind = FluxKind.ROE
    periodic: Tuple[bool, bool] = (False, False)
    exact: Optional[ExactSolution] = None
    description: str = ""
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def default_elements(self) -> Tuple[int, int]:
        """Element counts (nx, ny) of a single-block case, summed counts otherwise"""
        if len(self.blocks) == 1:
            return self.blocks[0].nx, self.blocks[0].ny
        mesh = self.build_mesh()
        return len(np.unique(np.round(mesh.x0, 10))), len(np.unique(np.round(mesh.y0, 10)))

    def build_mesh(
        self,
        elements: Optional[Tuple[int, int]] = None,
        refinement: Tuple[int, int] = (1, 1)
    ) -> Mesh2D:
        """
        Mesh of the case

        Args:
            elements: (nx, ny) override, single-block cases only
            refinement: uniform refinement factors per direction
        """
        blocks = self.blocks
        if elements is not None:
            if len(blocks) != 1:
                raise ConfigurationError(
                    f"Case '{self.name}' has {len(blocks)} blocks; use mesh_refinement instead of a mesh override"
                )
            only = blocks[0]
            blocks = [Block(only.name, only.x_range, only.y_range, int(elements[0]), int(elements[1]), dict(only.boundaries))]
        fx, fy = refinement
        if fx < 1 or fy < 1:
            raise ConfigurationError(f"Refinement factors must be >= 1, got {refinement}")
        blocks = [block.refined(fx, fy) for block in blocks]
        return Mesh2D.from_blocks(blocks, periodic_x=self.periodic[0], periodic_y=self.periodic[1])

    def boundary_set(self) -> BoundarySet:
        return BoundarySet(self.boundaries)

    def initial_prim(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        prim = np.asarray(self.initializer(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)))
        if np.any(prim[..., 0] <= 0.0) or np.any(prim[..., 3] <= 0.0):
            raise ConfigurationError(f"Case '{self.name}' initializer produced a non-physical state")
        return prim

    def initial_state(self, mesh: Mesh2D, degree: int) -> HybridState:
        """Pure-DG state interpolating the initializer at the Gauss nodes"""
        nodes = get_operators(degree).nodes
        X, Y = mesh.node_coordinates(nodes)
        return HybridState.all_dg(prim_to_cons(self.initial_prim(X, Y)))


def _quadrant_initializer(states: Dict[int, Tuple[float, float, float, float]], center=(0.5, 0.5)) -> PrimInitializer:
    """Quadrants numbered counterclockwise from the upper right"""
    table = np.array([states[q] for q in (1, 2, 3, 4)], dtype=np.float64)

    def initializer(x, y):
        right = x >= center[0]
        top = y >= center[1]
        quadrant = np.where(top, np.where(right, 0, 1), np.where(right, 3, 2))
        return table[quadrant]

    return initializer


RIEMANN_CONFIGURATIONS: Dict[int, Dict[str, object]] = {
    4: {
        'states': {
            1: (1.1, 0.0, 0.0, 1.1),
            2: (0.5065, 0.8939, 0.0, 0.35),
            3: (1.1, 0.8939, 0.8939, 1.1),
            4: (0.5065, 0.0, 0.8939, 0.35),
        },
        't_end': 0.25,
    },
    6: {
        'states': {
            1: (1.0, 0.0, 0.0, 1.0),
            2: (0.5, -0.8708, 0.0, 0.3636),
            3: (1.0, -0.8708, 0.7977, 1.0),
            4: (0.5, 0.0, 0.7977, 0.3636),
        },
        't_end': 0.2,
    },
    12: {
        'states': {
            1: (0.5313, 0.0, 0.0, 0.4),
            2: (1.0, 0.7276, 0.0, 1.0),
            3: (0.8, 0.0, 0.0, 1.0),
            4: (1.0, 0.0, 0.7276, 1.0),
        },
        't_end': 0.25,
    },
}


def riemann2d(config: int = 4, elements: Tuple[int, int] = (50, 50)) -> CaseSpec:
    """2D Riemann problem on [0,1]^2 with the quadrant interface at (0.5, 0.5)"""
    if config not in RIEMANN_CONFIGURATIONS:
        raise ConfigurationError(f"Riemann configuration must be one of {sorted(RIEMANN_CONFIGURATIONS)}, got {config}")
    setup = RIEMANN_CONFIGURATIONS[config]
    initializer = _quadrant_initializer(setup['states'])

    def frozen(x, y, t):
        return initializer(x, y)

    sides = {side: 'farfield' for side in ('west', 'east', 'south', 'north')}
    return CaseSpec(
        name=f"riemann{config}",
        domain=(0.0, 1.0, 0.0, 1.0),
        blocks=[Block('main', (0.0, 1.0), (0.0, 1.0), elements[0], elements[1], sides)],
        initializer=initializer,
        boundaries={'farfield': DirichletBoundary(frozen)},
        t_end=float(setup['t_end']),
        flux=FluxKind.ROE,
        description=f"2D Riemann problem, configuration {config}",
        metadata={'config': config, 'states': setup['states']},
    )


DMR_SHOCK_FOOT = 1.0 / 6.0
DMR_MACH = 10.0


def double_mach(elements: Tuple[int, int] = (49, 12)) -> CaseSpec:
    """
    Double Mach reflection on [0,4] x [0,1]

    A Mach-10 shock inclined at 60 degrees to the wall, foot at x = 1/6.
    The top boundary follows the exact traveling shock.
    """
    rho2, speed2, p2, shock_speed = post_shock_state(DMR_MACH, 1.4, 1.0)
    angle = np.pi / 6.0
    post = np.array([rho2, speed2 * np.cos(angle), -speed2 * np.sin(angle), p2])
    pre = np.array([1.4, 0.0, 0.0, 1.0])
    slope = 1.0 / np.sqrt(3.0)
    travel = shock_speed / np.sin(np.pi / 3.0)

    def shock_x(y, t):
        return DMR_SHOCK_FOOT + y * slope + travel * t

    def initializer(x, y):
        behind = x < shock_x(y, 0.0)
        return np.where(behind[..., None], post, pre)

    def top(x, y, t):
        behind = x < shock_x(y, t)
        return np.where(behind[..., None], post, pre)

    def post_state(x, y, t):
        return np.broadcast_to(post, np.shape(x) + (4,))

    def before_foot(x, y, t):
        return x < DMR_SHOCK_FOOT

    boundaries = {
        'inflow': DirichletBoundary(post_state),
        'outflow': OutflowBoundary(),
        'top': DirichletBoundary(top),
        'bottom': CompositeBoundary(before_foot, DirichletBoundary(post_state), SlipWallBoundary()),
    }
    sides = {'west': 'inflow', 'east': 'outflow', 'south': 'bottom', 'north': 'top'}
    return CaseSpec(
        name="double_mach",
        domain=(0.0, 4.0, 0.0, 1.0),
        blocks=[Block('main', (0.0, 4.0), (0.0, 1.0), elements[0], elements[1], sides)],
        initializer=initializer,
        boundaries=boundaries,
        t_end=0.2,
        flux=FluxKind.ROE,
        description="Double Mach reflection, Mach 10",
        metadata={'post_shock': post.tolist(), 'pre_shock': pre.tolist()},
    )


def forward_step() -> CaseSpec:
    """
    Mach-3 flow over a forward facing step, corner at (0.6, 0.2)

    Three blocks: 10x5 under the inflow channel, 10x20 above it, 40x20
    over the step (50 elements in x, 25 and 20 in y).
    """
    inflow = (1.4, 3.0, 0.0, 1.0)
    blocks = [
        Block('lower_inlet', (0.0, 0.6), (0.0, 0.2), 10, 5,
              {'west': 'inflow', 'south': 'wall', 'east': 'wall'}),
        Block('upper_inlet', (0.0, 0.6), (0.2, 1.0), 10, 20,
              {'west': 'inflow', 'north': 'wall'}),
        Block('channel', (0.6, 3.0), (0.2, 1.0), 40, 20,
              {'south': 'wall', 'north': 'wall', 'east': 'outflow'}),
    ]

    def initializer(x, y):
        return np.broadcast_to(np.asarray(inflow), np.shape(x) + (4,)).copy()

    return CaseSpec(
        name="forward_step",
        domain=(0.0, 3.0, 0.0, 1.0),
        blocks=blocks,
        initializer=initializer,
        boundaries={
            'inflow': DirichletBoundary(inflow),
            'outflow': OutflowBoundary(),
            'wall': SlipWallBoundary(),
        },
        t_end=4.0,
        flux=FluxKind.HLLE,
        description="Forward facing step, Mach 3",
        metadata={'inflow': inflow, 'step_corner': (0.6, 0.2)},
    )


def isentropic_vortex(
    elements: Tuple[int, int] = (8, 8),
    strength: float = 5.0,
    t_end: float = 1.0
) -> CaseSpec:
    """Isentropic vortex advected diagonally through the periodic box [0,10]^2"""
    length = 10.0
    center = (5.0, 5.0)
    velocity = (1.0, 1.0)

    def exact(x, y, t):
        dx = np.mod(x - center[0] - velocity[0] * t + 0.5 * length, length) - 0.5 * length
        dy = np.mod(y - center[1] - velocity[1] * t + 0.5 * length, length) - 0.5 * length
        r2 = dx * dx + dy * dy
        bump = np.exp(0.5 * (1.0 - r2))
        temperature = 1.0 - (GAMMA - 1.0) * strength ** 2 / (8.0 * GAMMA * np.pi ** 2) * bump ** 2
        rho = temperature ** (1.0 / (GAMMA - 1.0))
        u = velocity[0] - strength / (2.0 * np.pi) * bump * dy
        v = velocity[1] + strength / (2.0 * np.pi) * bump * dx
        return np.stack([rho, u, v, rho ** GAMMA], axis=-1)

    def initializer(x, y):
        return exact(x, y, 0.0)

    return CaseSpec(
        name="isentropic_vortex",
        domain=(0.0, length, 0.0, length),
        blocks=[Block('main', (0.0, length), (0.0, length), elements[0], elements[1])],
        initializer=initializer,
        boundaries={},
        t_end=t_end,
        flux=FluxKind.ROE,
        periodic=(True, True),
        exact=exact,
        description="Isentropic vortex, periodic",
    )


SOD_LEFT = (1.0, 0.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.0, 0.1)


def sod_strip(elements: int = 20, height: float = 0.1, t_end: float = 0.2) -> CaseSpec:
    """Sod shock tube on [0,1] x [0,height], one periodic element row"""
    def initializer(x, y):
        return np.where((x < 0.5)[..., None], np.asarray(SOD_LEFT), np.asarray(SOD_RIGHT))

    return CaseSpec(
        name="sod_strip",
        domain=(0.0, 1.0, 0.0, height),
        blocks=[Block('main', (0.0, 1.0), (0.0, height), elements, 1, {'west': 'left', 'east': 'right'})],
        initializer=initializer,
        boundaries={'left': DirichletBoundary(SOD_LEFT), 'right': DirichletBoundary(SOD_RIGHT)},
        t_end=t_end,
        flux=FluxKind.ROE,
        periodic=(False, True),
        description="Sod shock tube",
        metadata={'interface': 0.5},
    )


def stationary_shock(
    angle: float = 0.0,
    mach: float = 2.0,
    position: float = 0.55,
    elements: Tuple[int, int] = (10, 10),
    t_end: float = 0.1
) -> CaseSpec:
    """
    Steady normal shock on [0,1]^2

    The shock line passes through (position, 0.5) with its normal at
    `angle` degrees from the x axis; gas flows along the normal. Angle 0
    gives a grid-aligned shock. Boundaries hold the exact solution.
    """
    theta = np.deg2rad(angle)
    normal = np.array([np.cos(theta), np.sin(theta)])
    rho1, p1 = 1.4, 1.0
    c1 = np.sqrt(GAMMA * p1 / rho1)
    u1 = mach * c1
    rho2, _, p2, _ = post_shock_state(mach, rho1, p1)
    u2 = u1 * rho1 / rho2
    upstream = np.array([rho1, u1 * normal[0], u1 * normal[1], p1])
    downstream = np.array([rho2, u2 * normal[0], u2 * normal[1], p2])

    def signed_distance(x, y):
        return (x - position) * normal[0] + (y - 0.5) * normal[1]

    def exact(x, y, t):
        return np.where((signed_distance(x, y) < 0.0)[..., None], upstream, downstream)

    def initializer(x, y):
        return exact(x, y, 0.0)

    sides = {side: 'exact' for side in ('west', 'east', 'south', 'north')}
    return CaseSpec(
        name="stationary_shock",
        domain=(0.0, 1.0, 0.0, 1.0),
        blocks=[Block('main', (0.0, 1.0), (0.0, 1.0), elements[0], elements[1], sides)],
        initializer=initializer,
        boundaries={'exact': DirichletBoundary(exact)},
        t_end=t_end,
        flux=FluxKind.ROE,
        exact=exact,
        description=f"Stationary Mach-{mach:g} shock at {angle:g} degrees",
        metadata={'angle': angle, 'mach': mach, 'position': position, 'normal': normal.tolist()},
    )


def shock_distance(case: CaseSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Signed distance to the shock line of a stationary_shock case"""
    normal = case.metadata['normal']
    return (x - case.metadata['position']) * normal[0] + (y - 0.5) * normal[1]


_REGISTRY: Dict[str, Callable[..., CaseSpec]] = {
    'riemann4': lambda **kw: riemann2d(4, **kw),
    'riemann6': lambda **kw: riemann2d(6, **kw),
    'riemann12': lambda **kw: riemann2d(12, **kw),
    'riemann2d': riemann2d,
    'double_mach': double_mach,
    'forward_step': forward_step,
    'isentropic_vortex': isentropic_vortex,
    'sod_strip': sod_strip,
    'stationary_shock': stationary_shock,
}


def list_cases() -> List[str]:
    return sorted(_REGISTRY)


def get_case(name: str, **options) -> CaseSpec:
    """
    Case by name with constructor options

    Raises:
        ConfigurationError: unknown case or option
    """
    factory = _REGISTRY.get(name)
    if factory is None:
        raise ConfigurationError(f"Unknown case '{name}'. Available: {', '.join(list_cases())}")
    try:
        return factory(**options)
    except TypeError as e:
        raise ConfigurationError(f"Invalid options for case '{name}': {e}") from e
