"""
Anisotropic mesh-refinement indicator from binary edge maps

For each direction the indicator sums, over the N+1 grid lines running in
that direction, a geometric weight of the number r of flagged points on the
line:

    I = sum_lines sum_{s=1}^{r-1} (b^(s-1) + b^s),  b = 1.7

A direction is split when I reaches the threshold of the current level
(33 for the first level, 172 for the second).
"""
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.common.logging import get_logger
from src.common.models import RefineEntry, RefinePlan, SplitKind
from src.solver.mesh import Mesh2D

BASE = 1.7
DEFAULT_THRESHOLDS = (33.0, 172.0)

logger = get_logger("meshref")

Localizer = Callable[[np.ndarray], np.ndarray]


def line_weights(n_points: int, base: float = BASE) -> np.ndarray:
    """Contribution of a line with r = 0..n_points flagged points"""
    weights = np.zeros(n_points + 1)
    for r in range(2, n_points + 1):
        weights[r] = weights[r - 1] + base ** (r - 2) + base ** (r - 1)
    return weights


def meshref_indicator(edge_map: np.ndarray, base: float = BASE) -> Tuple[float, float]:
    """
    Directional refinement indicators (I_x, I_y) of one (N+1, N+1) edge map

    The map is indexed [i_x, j_y]; x-lines are edge_map[:, j].
    """
    flagged = np.asarray(edge_map) != 0
    weights = line_weights(max(flagged.shape), base)
    r_x = flagged.sum(axis=0)
    r_y = flagged.sum(axis=1)
    return float(np.sum(weights[r_x])), float(np.sum(weights[r_y]))


def meshref_indicators(edge_maps: np.ndarray, base: float = BASE) -> np.ndarray:
    """(n_elem, 2) indicators of a stack of edge maps"""
    edge_maps = np.asarray(edge_maps)
    if edge_maps.shape[0] == 0:
        return np.zeros((0, 2))
    return np.array([meshref_indicator(m, base) for m in edge_maps])


def child_offsets(split: SplitKind) -> List[Tuple[int, int, int]]:
    """(child index, x offset, y offset) in halves of the parent"""
    if split == SplitKind.SPLIT_X:
        return [(0, 0, 0), (1, 1, 0)]
    if split == SplitKind.SPLIT_Y:
        return [(0, 0, 0), (1, 0, 1)]
    if split == SplitKind.SPLIT_XY:
        return [(cx + 2 * cy, cx, cy) for cy in (0, 1) for cx in (0, 1)]
    return []


def child_field(parent: np.ndarray, split: SplitKind, offset_x: int, offset_y: int) -> np.ndarray:
    """Constant interpolation of a parent sub-cell field onto one child's sub-cell grid"""
    n = parent.shape[0]
    index = np.arange(n)
    ix = (offset_x * n + index) // 2 if split.splits_x else index
    iy = (offset_y * n + index) // 2 if split.splits_y else index
    return parent[np.ix_(ix, iy)]


def grade_levels(levels: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    """
    Raise levels until face neighbors differ by at most one per direction

    Args:
        levels: (n_elem, 2) refinement levels in x and y
        neighbors: (n_elem, 4) face neighbor ids, negative on boundaries
    """
    levels = levels.copy()
    valid = neighbors >= 0
    safe = np.where(valid, neighbors, 0)
    while True:
        neighbor_levels = np.where(valid[..., None], levels[safe], 0)
        required = np.maximum(levels, neighbor_levels.max(axis=1) - 1)
        if np.array_equal(required, levels):
            return levels
        levels = required


def build_refine_plan(
    edge_maps: np.ndarray,
    subcell_density: Optional[np.ndarray] = None,
    mesh: Optional[Mesh2D] = None,
    thresholds: Tuple[float, float] = DEFAULT_THRESHOLDS,
    base: float = BASE,
    localize: Optional[Localizer] = None
) -> RefinePlan:
    """
    Two-level anisotropic refinement plan

    Level 1 splits every direction whose indicator reaches thresholds[0].
    When a localizer and the sub-cell density are given, the children of
    split elements are rebuilt by constant interpolation, localized again,
    and split a second time in the directions already split where their own
    indicator reaches thresholds[1]. With a mesh, levels are graded so face
    neighbors differ by at most one level per direction.

    Args:
        edge_maps: (n_elem, N+1, N+1) binary maps, all-zero for unflagged elements
        subcell_density: (n_elem, N+1, N+1) sub-cell density for the second pass
        mesh: mesh providing face neighbors for grading
        localize: edge maps of a (k, N+1, N+1) stack of sub-cell fields
    """
    edge_maps = np.asarray(edge_maps)
    n_elem = edge_maps.shape[0]
    first, second = thresholds
    indicators = meshref_indicators(edge_maps, base)
    split_first = indicators >= first

    levels = split_first.astype(np.int64)
    children = {}
    if localize is not None and subcell_density is not None and np.any(split_first):
        parents = []
        fields = []
        for element in np.nonzero(np.any(split_first, axis=1))[0]:
            split = SplitKind.from_directions(*split_first[element])
            for child, ox, oy in child_offsets(split):
                parents.append((element, child, split))
                fields.append(child_field(subcell_density[element], split, ox, oy))
        child_indicators = meshref_indicators(localize(np.stack(fields)), base)
        for (element, child, split), values in zip(parents, child_indicators):
            split_x = split.splits_x and values[0] >= second
            split_y = split.splits_y and values[1] >= second
            if split_x or split_y:
                children.setdefault(element, []).append((child, SplitKind.from_directions(split_x, split_y), values))
                levels[element, 0] = max(levels[element, 0], 2 if split_x else 1)
                levels[element, 1] = max(levels[element, 1], 2 if split_y else 1)

    if mesh is not None and n_elem == mesh.n_elements:
        graded = grade_levels(levels, mesh.neighbors)
        raised = int(np.sum(np.any(graded != levels, axis=1)))
        if raised:
            logger.debug(f"Grading raised the level of {raised} element(s)")
        levels = graded

    entries = []
    for element in np.nonzero(np.any(levels > 0, axis=1))[0]:
        entries.append(RefineEntry(
            element_id=int(element),
            level=1,
            split=SplitKind.from_directions(bool(levels[element, 0] > 0), bool(levels[element, 1] > 0)),
            indicator_x=float(indicators[element, 0]),
            indicator_y=float(indicators[element, 1]),
        ))
        for child, split, values in children.get(element, []):
            entries.append(RefineEntry(
                element_id=int(element),
                level=2,
                split=split,
                indicator_x=float(values[0]),
                indicator_y=float(values[1]),
                child=int(child),
            ))

    plan = RefinePlan(entries=entries, thresholds=(float(first), float(second)))
    logger.info(f"Refinement plan: {len(plan.split_elements())} element(s) split, levels {plan.max_levels()}")
    return plan


def refinement_factors(plan: RefinePlan) -> Tuple[int, int]:
    """Uniform element-count multipliers covering the deepest level per direction"""
    levels = plan.max_levels()
    return 2 ** levels['x'], 2 ** levels['y']
