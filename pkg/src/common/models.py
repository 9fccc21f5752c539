"""
Data models for the shock-capturing framework
"""
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum, IntEnum
from typing import Any, Dict, List, Optional

import numpy as np


class NodeFamily(str, Enum):
    """Node distribution an element image lives on"""
    GAUSS = "gauss"
    EQUISPACED = "equispaced"


class Representation(IntEnum):
    """Per-element solution representation (value written to snapshots)"""
    DG = 0
    FV = 1


class IndicatorKind(str, Enum):
    """Troubled-cell indicator selection"""
    NONE = "none"
    MODAL = "modal"
    JUMP = "jump"
    ANNSI = "annsi"


class FluxKind(str, Enum):
    """Numerical flux function"""
    ROE = "roe"
    HLLE = "hlle"


class SplitKind(str, Enum):
    """Anisotropic refinement decision"""
    NONE = "none"
    SPLIT_X = "split-x"
    SPLIT_Y = "split-y"
    SPLIT_XY = "split-xy"

    @classmethod
    def from_directions(cls, split_x: bool, split_y: bool) -> "SplitKind":
        if split_x and split_y:
            return cls.SPLIT_XY
        if split_x:
            return cls.SPLIT_X
        if split_y:
            return cls.SPLIT_Y
        return cls.NONE

    @property
    def splits_x(self) -> bool:
        return self in (SplitKind.SPLIT_X, SplitKind.SPLIT_XY)

    @property
    def splits_y(self) -> bool:
        return self in (SplitKind.SPLIT_Y, SplitKind.SPLIT_XY)


@dataclass
class HybridState:
    """
    Global solution of the hybrid DG/FV scheme

    `fields` has shape (n_elements, N+1, N+1, 4), index order [element, i_x, j_y, variable].
    DG elements hold Gauss-nodal values, FV elements hold sub-cell means.
    """
    fields: np.ndarray
    flags: np.ndarray
    indicator_values: np.ndarray
    time: float = 0.0
    step: int = 0

    @classmethod
    def all_dg(cls, fields: np.ndarray, time: float = 0.0) -> "HybridState":
        n_elements = fields.shape[0]
        return cls(
            fields=fields,
            flags=np.full(n_elements, Representation.DG, dtype=np.int8),
            indicator_values=np.zeros(n_elements),
            time=time,
        )

    @property
    def n_elements(self) -> int:
        return self.fields.shape[0]

    @property
    def degree(self) -> int:
        return self.fields.shape[1] - 1

    @property
    def fv_mask(self) -> np.ndarray:
        return self.flags == Representation.FV

    def copy(self) -> "HybridState":
        return HybridState(
            fields=self.fields.copy(),
            flags=self.flags.copy(),
            indicator_values=self.indicator_values.copy(),
            time=self.time,
            step=self.step,
        )


@dataclass
class SampleSet:
    """
    A batch of training samples

    X: (n, 1, N+1, N+1) float32 normalized images
    Y: (n, 1, N+1, N+1) uint8 binary edge maps
    classes: (n,) uint8 element class (any(Y))
    families: (n,) uint8 function family id 1-7
    """
    X: np.ndarray
    Y: np.ndarray
    classes: np.ndarray
    families: np.ndarray
    degree: int
    node_family: NodeFamily

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, index: np.ndarray) -> "SampleSet":
        return SampleSet(
            X=self.X[index],
            Y=self.Y[index],
            classes=self.classes[index],
            families=self.families[index],
            degree=self.degree,
            node_family=self.node_family,
        )

    def family_counts(self) -> Dict[int, Dict[int, int]]:
        """Per-family class counts, {family: {0: n0, 1: n1}}"""
        counts: Dict[int, Dict[int, int]] = {}
        for family in range(1, 8):
            in_family = self.families == family
            counts[family] = {
                0: int(np.sum(in_family & (self.classes == 0))),
                1: int(np.sum(in_family & (self.classes == 1))),
            }
        return counts


@dataclass
class RefineEntry:
    """One row of a refinement plan"""
    element_id: int
    level: int
    split: SplitKind
    indicator_x: float
    indicator_y: float
    child: int = -1  # -1 for the original element, child index for level-2 rows


@dataclass
class RefinePlan:
    """Anisotropic refinement plan (levels 1 and 2)"""
    entries: List[RefineEntry] = field(default_factory=list)
    thresholds: tuple = (33.0, 172.0)

    def is_empty(self) -> bool:
        return not any(entry.split != SplitKind.NONE for entry in self.entries)

    def split_elements(self) -> List[int]:
        return sorted({e.element_id for e in self.entries if e.split != SplitKind.NONE})

    def max_levels(self) -> Dict[str, int]:
        """Deepest refinement level reached per direction"""
        level_x = 0
        level_y = 0
        for entry in self.entries:
            if entry.split.splits_x:
                level_x = max(level_x, entry.level)
            if entry.split.splits_y:
                level_y = max(level_y, entry.level)
        return {'x': level_x, 'y': level_y}


@dataclass
class TrainingRecord:
    """Per-epoch training history row"""
    epoch: int
    lr: float
    train_loss: float
    val_loss: float
    val_f1: float


@dataclass
class SimulationResult:
    """Simulation execution result"""
    success: bool
    case: str
    start_time: datetime
    end_time: Optional[datetime] = None
    final_time: float = 0.0
    steps: int = 0
    snapshots: List[str] = field(default_factory=list)
    max_fv_fraction: float = 0.0
    errors: List[str] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def duration_seconds(self) -> float:
        if self.end_time is None:
            return 0.0
        return (self.end_time - self.start_time).total_seconds()
