"""
Analytic function families for synthetic training data

Seven families on [-1, 1]^2: smooth ones (linear, oscillations, Gaussian
bumps) that never carry a shock, and non-smooth ones (piecewise constants,
kinks, Gibbs-like oscillations) whose discontinuities are known in closed
form. Every draw records the curves along which the function is
non-smooth so labels can be computed analytically.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.common.exceptions import ConfigurationError

FAMILIES = tuple(range(1, 8))
SMOOTH_FAMILIES = (1, 2, 3)

# element-count choices (n_e, probability) per family
MESH_CHOICES = {
    1: ((1, 10, 20), (0.5, 0.3, 0.2)),
    2: ((1, 10, 20), (0.3, 0.4, 0.3)),
    3: ((10, 20), (0.6, 0.4)),
}
STRAIGHT_FRACTION = 0.7


@dataclass(frozen=True)
class Curve:
    """
    Non-smooth curve g(x, y) = 0 with

        g = c00 + c10 x + c01 y + c20 x^2 + c02 y^2

    `strength` is the gradient jump across the curve; None for jumps in value.
    """
    c00: float
    c10: float = 0.0
    c01: float = 0.0
    c20: float = 0.0
    c02: float = 0.0
    strength: Optional[float] = None

    def __call__(self, x, y):
        return self.c00 + self.c10 * x + self.c01 * y + self.c20 * x * x + self.c02 * y * y

    def roots_at_y(self, y: float) -> np.ndarray:
        """x positions where the curve crosses the horizontal line y"""
        return _real_roots(self.c20, self.c10, self.c00 + self.c01 * y + self.c02 * y * y)

    def roots_at_x(self, x: float) -> np.ndarray:
        """y positions where the curve crosses the vertical line x"""
        return _real_roots(self.c02, self.c01, self.c00 + self.c10 * x + self.c20 * x * x)


def _real_roots(a: float, b: float, c: float) -> np.ndarray:
    """Real roots of a t^2 + b t + c"""
    if a == 0.0:
        if b == 0.0:
            return np.empty(0)
        return np.array([-c / b])
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return np.empty(0)
    sq = np.sqrt(disc)
    # numerically stable pair
    q = -0.5 * (b + np.copysign(sq, b))
    if q == 0.0:
        return np.array([0.0])
    return np.unique(np.array([q / a, c / q]))


@dataclass
class FamilySample:
    """One draw from a function family"""
    family: int
    params: Dict[str, object]
    n_elements: int
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    curves: List[Curve] = field(default_factory=list)

    @property
    def smooth(self) -> bool:
        return self.family in SMOOTH_FAMILIES


def nyquist_frequency(degree: int) -> float:
    return degree / 2.0


def _mesh_count(family: int, rng: np.random.Generator) -> int:
    if family not in MESH_CHOICES:
        return 1
    choices, probabilities = MESH_CHOICES[family]
    return int(rng.choice(choices, p=probabilities))


def _linear(rng, degree):
    a, b = rng.normal(0.0, 0.2, 2)
    return {'a': a, 'b': b}, (lambda x, y: a * x + b * y), []


def _oscillations(rng, degree):
    max_frequency = max(int(np.floor(nyquist_frequency(degree))), 1)
    n_f = int(rng.integers(1, max_frequency + 1))
    a = rng.uniform(-0.5, 0.5, n_f)
    b = rng.uniform(-0.5, 0.5, n_f)
    c = rng.uniform(0.0, 1.0)
    k = np.arange(1, n_f + 1)

    def evaluate(x, y):
        x = np.asarray(x)[..., None]
        y = np.asarray(y)[..., None]
        return np.sum(a * np.sin(k * np.pi * x) + b * np.cos(k * np.pi * y), axis=-1) + c

    return {'n_f': n_f, 'a': a, 'b': b, 'c': c}, evaluate, []


def _exponentials(rng, degree):
    a = rng.uniform(-1.0, 1.0, 6)

    def evaluate(x, y):
        return (np.exp(a[0] * ((x - a[1]) ** 2 + (y - a[2]) ** 2))
                + np.exp(a[3] * ((x - a[4]) ** 2 + (y - a[5]) ** 2)))

    return {'a': a}, evaluate, []


def _four_sections(rng, degree):
    values = rng.uniform(0.0, 1.0, 4)
    m = rng.uniform(0.0, 10.0)
    x0, y0 = rng.uniform(-1.0, 1.0, 2)
    d = 1 if rng.uniform() < STRAIGHT_FRACTION else 2

    if d == 1:
        # y - y0 = m (x - x0)  and  y - y0 = -(x - x0) / m
        first = Curve(c00=-y0 + m * x0, c10=-m, c01=1.0)
        second = Curve(c00=-m * y0 - x0, c10=1.0, c01=m)
    else:
        # y - y0 = m (x - x0)^2  and  y - y0 = -(x - x0)^2 / m
        first = Curve(c00=-y0 - m * x0 * x0, c10=2.0 * m * x0, c01=1.0, c20=-m)
        second = Curve(c00=-m * y0 + x0 * x0, c10=-2.0 * x0, c01=m, c20=1.0)

    def evaluate(x, y):
        section = 2 * (first(x, y) > 0) + (second(x, y) > 0)
        return values[section]

    return {'values': values, 'm': m, 'x0': x0, 'y0': y0, 'd': d}, evaluate, [first, second]


def _kink(rng, degree):
    a = rng.normal(0.0, 0.4)
    m = rng.uniform(-2.0, 2.0)
    x0, y0 = rng.uniform(-1.0, 1.0, 2)
    c = rng.uniform(0.0, 1.0)
    line = Curve(c00=-y0 + m * x0, c10=-m, c01=1.0, strength=abs(a))

    def evaluate(x, y):
        return a * np.abs((y - y0) - m * (x - x0)) + c

    return {'a': a, 'm': m, 'x0': x0, 'y0': y0, 'c': c}, evaluate, [line]


def _ramps(rng, degree):
    a = rng.choice([-1.0, 1.0], 3)
    b = rng.normal(0.0, 0.6, 2)
    x0, y0 = rng.uniform(-0.6, 0.6, 2)
    c = rng.uniform(0.0, 1.0)

    if a[0] > 0:
        def evaluate(x, y):
            return a[1] * np.maximum(0.0, b[0] * (x - x0)) + a[2] * np.maximum(0.0, b[1] * (y - y0)) + c
        curves = [
            Curve(c00=-x0, c10=1.0, strength=abs(b[0])),
            Curve(c00=-y0, c01=1.0, strength=abs(b[1])),
        ]
    else:
        def evaluate(x, y):
            return a[1] * np.maximum(0.0, b[0] * (x - x0) + b[1] * (y - y0)) + c
        curves = [Curve(c00=-b[0] * x0 - b[1] * y0, c10=b[0], c01=b[1], strength=float(np.max(np.abs(b))))]

    return {'a': a, 'b': b, 'x0': x0, 'y0': y0, 'c': c}, evaluate, curves


def _gibbs(rng, degree):
    c = rng.uniform(0.0, 1.0)
    a1, a2 = rng.normal(0.0, 0.4, 2)
    x0, y0 = rng.uniform(-1.0, 1.0, 2)
    a3 = rng.uniform(-2.0, 2.0)
    f = nyquist_frequency(degree)

    def evaluate(x, y):
        return (a1 * np.sin(f * np.pi * (x - x0)) * np.exp(a3 * (x - x0))
                + a2 * np.cos(f * np.pi * (y - y0)) * np.exp(a3 * (y - y0)) + c)

    return {'a1': a1, 'a2': a2, 'a3': a3, 'x0': x0, 'y0': y0, 'c': c, 'f': f}, evaluate, []


_BUILDERS = {
    1: _linear,
    2: _oscillations,
    3: _exponentials,
    4: _four_sections,
    5: _kink,
    6: _ramps,
    7: _gibbs,
}


def draw_family(family: int, rng: np.random.Generator, degree: int) -> FamilySample:
    """
    Draw parameters and a mesh count for one family

    Raises:
        ConfigurationError: unknown family id
    """
    if family not in _BUILDERS:
        raise ConfigurationError(f"Unknown function family {family}; expected 1-7")
    n_elements = _mesh_count(family, rng)
    params, evaluate, curves = _BUILDERS[family](rng, degree)
    return FamilySample(family=family, params=params, n_elements=n_elements, evaluate=evaluate, curves=curves)
