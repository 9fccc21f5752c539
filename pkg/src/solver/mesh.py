"""
Cartesian multi-block meshes

Elements are axis-aligned rectangles. Faces are numbered 0 = west,
1 = east, 2 = south, 3 = north; element-local node index i runs along x
and j along y. Interior faces are found by matching coordinates, so blocks
only need conforming element counts along shared edges.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.common.exceptions import ConfigurationError
from src.common.logging import get_logger

WEST, EAST, SOUTH, NORTH = 0, 1, 2, 3
FACE_NAMES = ('west', 'east', 'south', 'north')
OPPOSITE = (EAST, WEST, NORTH, SOUTH)
# outward unit normals per face
FACE_NORMALS = np.array([[-1.0, 0.0], [1.0, 0.0], [0.0, -1.0], [0.0, 1.0]])

_ROUND = 10


@dataclass
class Block:
    """Rectangular block of nx x ny equal elements"""
    name: str
    x_range: Tuple[float, float]
    y_range: Tuple[float, float]
    nx: int
    ny: int
    boundaries: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ConfigurationError(f"Block '{self.name}' needs at least one element per direction")
        if self.x_range[1] <= self.x_range[0] or self.y_range[1] <= self.y_range[0]:
            raise ConfigurationError(f"Block '{self.name}' has non-positive extent")
        unknown = set(self.boundaries) - set(FACE_NAMES)
        if unknown:
            raise ConfigurationError(f"Block '{self.name}' has unknown sides: {sorted(unknown)}")

    def refined(self, factor_x: int, factor_y: int) -> "Block":
        return Block(self.name, self.x_range, self.y_range, self.nx * factor_x, self.ny * factor_y, dict(self.boundaries))


@dataclass
class BoundaryFaces:
    """Domain-boundary faces sharing one side and tag"""
    side: int
    tag: str
    elements: np.ndarray


class Mesh2D:
    """
    Conforming Cartesian multi-block mesh

    Attributes:
        x0, y0: lower-left corner per element
        dx, dy: element extents (Jacobian dx*dy/4 > 0)
        neighbors: (n_elements, 4) neighbor id per face, -1 on the domain boundary
        tags: (n_elements, 4) boundary tag per face, '' for interior faces
    """

    def __init__(self, blocks: List[Block], periodic_x: bool = False, periodic_y: bool = False):
        self.logger = get_logger(self.__class__.__name__)
        self.blocks = list(blocks)
        self.periodic_x = periodic_x
        self.periodic_y = periodic_y

        x0, y0, dx, dy, block_ids, block_ij = [], [], [], [], [], []
        for b, block in enumerate(self.blocks):
            hx = (block.x_range[1] - block.x_range[0]) / block.nx
            hy = (block.y_range[1] - block.y_range[0]) / block.ny
            for jy in range(block.ny):
                for ix in range(block.nx):
                    x0.append(block.x_range[0] + ix * hx)
                    y0.append(block.y_range[0] + jy * hy)
                    dx.append(hx)
                    dy.append(hy)
                    block_ids.append(b)
                    block_ij.append((ix, jy))

        self.x0 = np.array(x0)
        self.y0 = np.array(y0)
        self.dx = np.array(dx)
        self.dy = np.array(dy)
        self.block_ids = np.array(block_ids, dtype=np.int64)
        self.block_ij = np.array(block_ij, dtype=np.int64).reshape(-1, 2)
        self.n_elements = len(x0)

        self.x_min = float(np.min(self.x0))
        self.x_max = float(np.max(self.x0 + self.dx))
        self.y_min = float(np.min(self.y0))
        self.y_max = float(np.max(self.y0 + self.dy))

        self.neighbors = np.full((self.n_elements, 4), -1, dtype=np.int64)
        self.tags = np.full((self.n_elements, 4), '', dtype=object)
        self._connect()
        self._build_face_lists()

        self.logger.debug(
            f"Mesh with {self.n_elements} elements in {len(self.blocks)} block(s), "
            f"{len(self.x_face_left)} x-faces, {len(self.y_face_bottom)} y-faces"
        )

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def from_blocks(cls, blocks: List[Block], periodic_x: bool = False, periodic_y: bool = False) -> "Mesh2D":
        return cls(blocks, periodic_x=periodic_x, periodic_y=periodic_y)

    @classmethod
    def uniform(
        cls,
        x_range: Tuple[float, float],
        y_range: Tuple[float, float],
        nx: int,
        ny: int,
        boundary: Optional[Dict[str, str]] = None,
        periodic_x: bool = False,
        periodic_y: bool = False
    ) -> "Mesh2D":
        """Single-block mesh; boundary maps side name -> tag"""
        boundaries = dict(boundary or {})
        return cls([Block('main', x_range, y_range, nx, ny, boundaries)], periodic_x, periodic_y)

    def refined(self, factor_x: int, factor_y: int) -> "Mesh2D":
        """Conforming uniform refinement of every block"""
        return Mesh2D(
            [block.refined(factor_x, factor_y) for block in self.blocks],
            periodic_x=self.periodic_x,
            periodic_y=self.periodic_y,
        )

    def _face_key(self, e: int, side: int):
        """Coordinate key of a face: (fixed coordinate, start, end)"""
        if side in (WEST, EAST):
            x = self.x0[e] + (self.dx[e] if side == EAST else 0.0)
            return ('x', round(x, _ROUND), round(self.y0[e], _ROUND), round(self.y0[e] + self.dy[e], _ROUND))
        y = self.y0[e] + (self.dy[e] if side == NORTH else 0.0)
        return ('y', round(y, _ROUND), round(self.x0[e], _ROUND), round(self.x0[e] + self.dx[e], _ROUND))

    def _connect(self) -> None:
        lookup: Dict[tuple, Tuple[int, int]] = {}
        for e in range(self.n_elements):
            for side in (WEST, SOUTH):
                lookup[self._face_key(e, side)] = (e, side)

        for e in range(self.n_elements):
            for side in (EAST, NORTH):
                key = self._face_key(e, side)
                match = lookup.get(key)
                if match is not None:
                    other, other_side = match
                    self.neighbors[e, side] = other
                    self.neighbors[other, other_side] = e

        if self.periodic_x:
            self._connect_periodic(EAST, WEST, self.x_max, self.x_min)
        if self.periodic_y:
            self._connect_periodic(NORTH, SOUTH, self.y_max, self.y_min)

        for e in range(self.n_elements):
            block = self.blocks[self.block_ids[e]]
            for side in range(4):
                if self.neighbors[e, side] >= 0:
                    continue
                tag = block.boundaries.get(FACE_NAMES[side])
                if tag is None:
                    raise ConfigurationError(
                        f"Element {e} ({block.name}) has an unmatched {FACE_NAMES[side]} face without a boundary tag"
                    )
                self.tags[e, side] = tag

    def _connect_periodic(self, high_side: int, low_side: int, high: float, low: float) -> None:
        shift = high - low
        lookup = {}
        for e in range(self.n_elements):
            key = self._face_key(e, low_side)
            if np.isclose(key[1], low):
                lookup[(key[0], round(key[1] + shift, _ROUND), key[2], key[3])] = e
        for e in range(self.n_elements):
            key = self._face_key(e, high_side)
            if np.isclose(key[1], high) and key in lookup:
                other = lookup[key]
                self.neighbors[e, high_side] = other
                self.neighbors[other, low_side] = e

    def _build_face_lists(self) -> None:
        """Interior faces listed once (from the west/south element) and boundary faces by (side, tag)"""
        east = self.neighbors[:, EAST]
        has_east = east >= 0
        self.x_face_left = np.nonzero(has_east)[0]
        self.x_face_right = east[has_east]

        north = self.neighbors[:, NORTH]
        has_north = north >= 0
        self.y_face_bottom = np.nonzero(has_north)[0]
        self.y_face_top = north[has_north]

        self.boundary_faces: List[BoundaryFaces] = []
        for side in range(4):
            on_boundary = self.neighbors[:, side] < 0
            for tag in sorted(set(self.tags[on_boundary, side])):
                elements = np.nonzero(on_boundary & (self.tags[:, side] == tag))[0]
                self.boundary_faces.append(BoundaryFaces(side=side, tag=tag, elements=elements))

    # ------------------------------------------------------------------
    # geometry

    def node_coordinates(self, ref_x: np.ndarray, ref_y: Optional[np.ndarray] = None):
        """
        Physical coordinates of reference points

        Returns:
            (X, Y) each shaped (n_elements, len(ref_x), len(ref_y)), indexed [e, i, j]
        """
        ref_y = ref_x if ref_y is None else ref_y
        X = self.x0[:, None, None] + 0.5 * (np.asarray(ref_x)[None, :, None] + 1.0) * self.dx[:, None, None]
        Y = self.y0[:, None, None] + 0.5 * (np.asarray(ref_y)[None, None, :] + 1.0) * self.dy[:, None, None]
        X, Y = np.broadcast_arrays(X, Y)
        return X.copy(), Y.copy()

    def face_coordinates(self, elements: np.ndarray, side: int, ref: np.ndarray):
        """Physical coordinates (len(elements), len(ref)) of points along one face"""
        ref = np.asarray(ref)
        t = 0.5 * (ref[None, :] + 1.0)
        if side in (WEST, EAST):
            x = self.x0[elements] + (self.dx[elements] if side == EAST else 0.0)
            X = np.repeat(x[:, None], ref.size, axis=1)
            Y = self.y0[elements][:, None] + t * self.dy[elements][:, None]
        else:
            y = self.y0[elements] + (self.dy[elements] if side == NORTH else 0.0)
            Y = np.repeat(y[:, None], ref.size, axis=1)
            X = self.x0[elements][:, None] + t * self.dx[elements][:, None]
        return X, Y

    @property
    def jacobian(self) -> np.ndarray:
        return 0.25 * self.dx * self.dy

    @property
    def area(self) -> np.ndarray:
        return self.dx * self.dy

    def centers(self):
        return self.x0 + 0.5 * self.dx, self.y0 + 0.5 * self.dy

    def find_element(self, x: float, y: float) -> int:
        """Element containing a point (first match on shared edges)"""
        inside = (self.x0 <= x) & (x <= self.x0 + self.dx) & (self.y0 <= y) & (y <= self.y0 + self.dy)
        hits = np.nonzero(inside)[0]
        if hits.size == 0:
            raise ConfigurationError(f"Point ({x}, {y}) lies outside the mesh")
        return int(hits[0])

    def describe(self) -> Dict[str, object]:
        return {
            'n_elements': self.n_elements,
            'blocks': [(b.name, b.nx, b.ny) for b in self.blocks],
            'extent': (self.x_min, self.x_max, self.y_min, self.y_max),
            'periodic': (self.periodic_x, self.periodic_y),
        }
