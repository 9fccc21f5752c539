"""
Sampling analytic functions onto element images
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from src.common.models import NodeFamily
from src.datagen.families import FamilySample
from src.numerics.basis import build_degree_projection, gauss_nodes, get_operators, subcell_centers


@dataclass
class ElementSample:
    """Raw degree-N image of one element and where its nodes lie"""
    values: np.ndarray
    x_nodes: np.ndarray
    y_nodes: np.ndarray
    bounds: Tuple[float, float, float, float]


def normalize(values: np.ndarray) -> np.ndarray:
    """
    Map an element image into [0, 1]

    Shift by -min when the minimum is negative, then divide by max|.| when
    it exceeds 1. Idempotent.
    """
    x = np.array(values, dtype=np.float64)
    low = x.min()
    if low < 0.0:
        x = x - low
    high = np.abs(x).max()
    if high > 1.0:
        x = x / high
    return x


@lru_cache(maxsize=None)
def _transfer(degree: int, node_family: NodeFamily) -> np.ndarray:
    projection = build_degree_projection(2 * degree, degree)
    if node_family == NodeFamily.EQUISPACED:
        return get_operators(degree).transfer.V_FV @ projection
    return projection


def node_positions(degree: int, node_family: NodeFamily) -> np.ndarray:
    """Reference positions in [-1, 1] of the image pixels"""
    if NodeFamily(node_family) == NodeFamily.EQUISPACED:
        return subcell_centers(degree)
    return gauss_nodes(degree).nodes


def sample_to_elements(sample: FamilySample, degree: int, node_family: NodeFamily) -> List[ElementSample]:
    """
    Evaluate a draw on its n_e x n_e mesh of [-1, 1]^2

    Each element is sampled at degree-2N Gauss nodes and projected to degree
    N; the equispaced family takes the sub-cell means of that polynomial.
    """
    node_family = NodeFamily(node_family)
    transfer = _transfer(degree, node_family)
    fine = gauss_nodes(2 * degree).nodes
    pixels = node_positions(degree, node_family)

    n_e = sample.n_elements
    h = 2.0 / n_e
    samples = []
    for ey in range(n_e):
        y_lo = -1.0 + ey * h
        for ex in range(n_e):
            x_lo = -1.0 + ex * h
            fx = x_lo + 0.5 * h * (fine + 1.0)
            fy = y_lo + 0.5 * h * (fine + 1.0)
            X, Y = np.meshgrid(fx, fy, indexing='ij')
            raw = transfer @ sample.evaluate(X, Y) @ transfer.T
            samples.append(ElementSample(
                values=raw,
                x_nodes=x_lo + 0.5 * h * (pixels + 1.0),
                y_nodes=y_lo + 0.5 * h * (pixels + 1.0),
                bounds=(x_lo, x_lo + h, y_lo, y_lo + h),
            ))
    return samples
