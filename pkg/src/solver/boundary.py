"""
Boundary conditions

A boundary condition turns the interior trace at boundary points into the
exterior state handed to the Riemann solver. Inputs are shaped
(n_faces, n_points, 4) with matching coordinate arrays (n_faces, n_points).
"""
from abc import ABC, abstractmethod
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np

from src.common.exceptions import ConfigurationError
from src.common.logging import get_logger
from src.numerics.euler import prim_to_cons

PrimFunction = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


class BoundaryCondition(ABC):
    """Base class for boundary conditions"""

    kind: str = "base"

    @abstractmethod
    def exterior(
        self,
        w_in: np.ndarray,
        normal: np.ndarray,
        x: np.ndarray,
        y: np.ndarray,
        t: float
    ) -> np.ndarray:
        """Exterior conservative state at the boundary points"""
        pass

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"


class DirichletBoundary(BoundaryCondition):
    """
    Prescribed state, either a constant (rho, u, v, p) or a function
    f(x, y, t) -> primitive array (..., 4)
    """

    kind = "dirichlet"

    def __init__(self, state: Union[Sequence[float], PrimFunction]):
        if callable(state):
            self._function: Optional[PrimFunction] = state
            self._constant = None
        else:
            self._function = None
            self._constant = prim_to_cons(np.asarray(state, dtype=np.float64))

    def exterior(self, w_in, normal, x, y, t):
        if self._function is not None:
            return prim_to_cons(self._function(x, y, t))
        return np.broadcast_to(self._constant, w_in.shape).copy()

    def __repr__(self) -> str:
        if self._function is not None:
            return f"DirichletBoundary({getattr(self._function, '__name__', 'function')})"
        return f"DirichletBoundary({self._constant.tolist()})"


class SlipWallBoundary(BoundaryCondition):
    """Reflecting wall: normal momentum mirrored, everything else copied"""

    kind = "slip-wall"

    def exterior(self, w_in, normal, x, y, t):
        n = np.asarray(normal, dtype=np.float64)
        w_out = w_in.copy()
        mn = w_in[..., 1] * n[..., 0] + w_in[..., 2] * n[..., 1]
        w_out[..., 1] = w_in[..., 1] - 2.0 * mn * n[..., 0]
        w_out[..., 2] = w_in[..., 2] - 2.0 * mn * n[..., 1]
        return w_out


class OutflowBoundary(BoundaryCondition):
    """Supersonic outflow: exterior copies the interior"""

    kind = "supersonic-outflow"

    def exterior(self, w_in, normal, x, y, t):
        return w_in.copy()


class CompositeBoundary(BoundaryCondition):
    """Chooses between two conditions point by point with selector(x, y, t) -> bool mask"""

    kind = "composite"

    def __init__(
        self,
        selector: Callable[[np.ndarray, np.ndarray, float], np.ndarray],
        when_true: BoundaryCondition,
        when_false: BoundaryCondition
    ):
        self.selector = selector
        self.when_true = when_true
        self.when_false = when_false

    def exterior(self, w_in, normal, x, y, t):
        mask = np.asarray(self.selector(x, y, t), dtype=bool)
        first = self.when_true.exterior(w_in, normal, x, y, t)
        second = self.when_false.exterior(w_in, normal, x, y, t)
        return np.where(mask[..., None], first, second)

    def __repr__(self) -> str:
        return f"CompositeBoundary({self.when_true!r}, {self.when_false!r})"


_KINDS = {
    'dirichlet': DirichletBoundary,
    'slip-wall': SlipWallBoundary,
    'wall': SlipWallBoundary,
    'supersonic-outflow': OutflowBoundary,
    'outflow': OutflowBoundary,
}


def make_boundary(kind: str, **params) -> BoundaryCondition:
    """
    Build a boundary condition by kind name

    Raises:
        ConfigurationError: unknown kind
    """
    cls = _KINDS.get(kind)
    if cls is None:
        raise ConfigurationError(f"Unknown boundary condition kind: {kind}")
    try:
        return cls(**params)
    except TypeError as e:
        raise ConfigurationError(f"Invalid parameters for boundary '{kind}': {e}") from e


class BoundarySet:
    """Boundary conditions by mesh tag"""

    def __init__(self, conditions: Dict[str, BoundaryCondition]):
        self.conditions = dict(conditions)
        self.logger = get_logger(self.__class__.__name__)

    def apply_bc(
        self,
        w_in: np.ndarray,
        tag: str,
        normal: np.ndarray,
        x: np.ndarray,
        y: np.ndarray,
        t: float
    ) -> np.ndarray:
        """
        Exterior trace for boundary faces carrying `tag`

        Raises:
            ConfigurationError: no condition registered for the tag
        """
        condition = self.conditions.get(tag)
        if condition is None:
            raise ConfigurationError(f"No boundary condition for tag '{tag}'")
        return condition.exterior(w_in, normal, x, y, t)

    def validate(self, tags) -> None:
        """Fail early when the mesh uses a tag without a condition"""
        missing = sorted(set(tags) - set(self.conditions))
        if missing:
            raise ConfigurationError(f"Boundary tags without conditions: {missing}")

    def __repr__(self) -> str:
        return f"BoundarySet({self.conditions!r})"
