"""
Base interface for snapshot storage
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.common.models import HybridState


@dataclass
class Snapshot:
    """
    One stored solution

    x, y: (n_elem, N+1, N+1) coordinates of the values in `state.fields`
    (Gauss nodes on DG elements, sub-cell centers on FV elements).
    edge_maps: element id -> binary (N+1, N+1) map, when localization ran.
    """
    state: HybridState
    x: np.ndarray
    y: np.ndarray
    case: str = ""
    edge_maps: Dict[int, np.ndarray] = field(default_factory=dict)
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def degree(self) -> int:
        return self.state.degree


class SnapshotStorage(ABC):
    """
    Abstract base class for snapshot storage

    Used by Simulation to persist the solution at output times
    """

    @abstractmethod
    def save_snapshot(self, key: str, snapshot: Snapshot, formats: Sequence[str] = ("csv",)) -> List[str]:
        """
        Save a snapshot

        Args:
            key: Storage key (e.g., 'snapshot_00003')
            snapshot: Solution, flags and optional edge maps
            formats: Output formats to write

        Returns:
            Paths written

        Raises:
            StorageError: If save operation fails
        """
        pass

    @abstractmethod
    def load_snapshot(self, key: str) -> Snapshot:
        """
        Load a snapshot

        Raises:
            StorageError: If load operation fails
            KeyError: If key doesn't exist
        """
        pass

    @abstractmethod
    def exists(self, key: str) -> bool:
        pass

    @abstractmethod
    def list_keys(self, prefix: Optional[str] = None) -> List[str]:
        """
        List all snapshot keys, optionally filtered by prefix
        """
        pass
