"""
Analytic edge-map labeling

Pixels adjacent to a discontinuity are marked per grid line: where a
non-smooth curve crosses a line of pixels between two pixels, both are
labeled; a crossing between the element edge and the outermost pixel labels
that pixel.
"""
from typing import Tuple

import numpy as np

from src.datagen.families import FamilySample, SMOOTH_FAMILIES
from src.datagen.sampling import ElementSample

EPSILON = 0.1
MIN_AMPLITUDE = 0.01
GIBBS_THRESHOLD = 0.2
TIE_TOLERANCE = 1e-12


def _mark_crossings(roots: np.ndarray, nodes: np.ndarray, low: float, high: float) -> np.ndarray:
    """Pixels along one line adjacent to the given crossing positions"""
    marked = np.zeros(nodes.size, dtype=bool)
    for r in roots:
        if r < low or r > high:
            continue
        k = np.searchsorted(nodes, r)
        if k == 0:
            marked[0] = True
        elif k == nodes.size:
            marked[-1] = True
        else:
            marked[k - 1] = True
            marked[k] = True
    return marked


def crossing_map(curve, element: ElementSample) -> np.ndarray:
    """(N+1, N+1) pixels straddling `curve`, indexed [i_x, j_y]"""
    x_lo, x_hi, y_lo, y_hi = element.bounds
    xs, ys = element.x_nodes, element.y_nodes
    labels = np.zeros((xs.size, ys.size), dtype=bool)
    for j, y in enumerate(ys):
        labels[:, j] |= _mark_crossings(curve.roots_at_y(y), xs, x_lo, x_hi)
    for i, x in enumerate(xs):
        labels[i, :] |= _mark_crossings(curve.roots_at_x(x), ys, y_lo, y_hi)
    return labels


def jump_condition(values: np.ndarray, factor: float) -> bool:
    """|max|u| - min u| > factor max|u| and max|u| > 0.01"""
    peak = float(np.max(np.abs(values)))
    return abs(peak - float(np.min(values))) > factor * peak and peak > MIN_AMPLITUDE


def label_edge_map(
    sample: FamilySample,
    element: ElementSample,
    epsilon: float = EPSILON
) -> Tuple[np.ndarray, int]:
    """
    Binary edge map and element class of one element image

    Returns:
        (Y as uint8 (N+1, N+1), class 0 or 1)
    """
    values = element.values
    labels = np.zeros(values.shape, dtype=bool)
    peak = float(np.max(np.abs(values)))

    if sample.family in SMOOTH_FAMILIES:
        pass
    elif sample.family == 7:
        if jump_condition(values, GIBBS_THRESHOLD):
            labels = np.abs(values) >= peak - TIE_TOLERANCE
    elif sample.family == 4:
        if jump_condition(values, epsilon):
            for curve in sample.curves:
                labels |= crossing_map(curve, element)
    else:
        for curve in sample.curves:
            if curve.strength > epsilon * peak and peak > MIN_AMPLITUDE:
                labels |= crossing_map(curve, element)

    Y = labels.astype(np.uint8)
    return Y, int(Y.any())
