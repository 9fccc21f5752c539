"""
Shared fixtures
"""
import numpy as np
import pytest

from src.common.config import IndicatorConfig, RunConfig
from src.common.models import HybridState, IndicatorKind, NodeFamily, SampleSet
from src.ml.hednet import build_network
from src.numerics.euler import prim_to_cons


def constant_state(n_elements: int, degree: int, prim=(1.0, 0.2, -0.1, 1.0)) -> HybridState:
    n = degree + 1
    fields = np.broadcast_to(prim_to_cons(np.asarray(prim, dtype=np.float64)), (n_elements, n, n, 4)).copy()
    return HybridState.all_dg(fields)


def step_density(degree: int, jump_at: int, low: float = 0.125, high: float = 1.0) -> np.ndarray:
    """(N+1, N+1) nodal density with a jump between x-columns jump_at-1 and jump_at"""
    values = np.full((degree + 1, degree + 1), high)
    values[jump_at:, :] = low
    return values


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_network():
    """Untrained N=3 detection network in float64"""
    return build_network(3, seed=7, node_family=NodeFamily.GAUSS, dtype=np.float64)


@pytest.fixture
def small_sample_set(rng):
    """Eight N=3 samples, half with a vertical edge"""
    n = 4
    X = rng.uniform(0.0, 1.0, (8, 1, n, n)).astype(np.float32)
    Y = np.zeros((8, 1, n, n), dtype=np.uint8)
    Y[::2, 0, 1:3, :] = 1
    classes = Y.reshape(8, -1).any(axis=1).astype(np.uint8)
    families = np.array([4, 1, 5, 2, 6, 3, 7, 1], dtype=np.uint8)
    return SampleSet(X=X, Y=Y, classes=classes, families=families, degree=3, node_family=NodeFamily.GAUSS)


@pytest.fixture
def jump_run_config(tmp_path):
    return RunConfig(
        case="sod_strip",
        degree=3,
        indicator=IndicatorConfig(kind=IndicatorKind.JUMP),
        output_dir=str(tmp_path / "run"),
    )
