"""
File-based snapshot storage

Every snapshot is a long-format table with one row per solution point:

    element, i, j, x, y, representation, indicator, rho, rho_u, rho_v, rho_e

written as CSV (always readable back), Parquet through pyarrow, or legacy
VTK text (write-only), plus a JSON sidecar with time, step, degree and case.
Edge maps go to '<key>_edges.csv' with columns element, i, j, edge.
"""
import json
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
import pyarrow as pa
import pyarrow.parquet as pq

from src.common.exceptions import StorageError
from src.common.logging import get_logger
from src.common.models import HybridState, RefineEntry, RefinePlan, SplitKind
from src.numerics.euler import pressure
from src.storage.base import Snapshot, SnapshotStorage

VARIABLES = ['rho', 'rho_u', 'rho_v', 'rho_e']
PLAN_COLUMNS = ['element_id', 'level', 'split', 'indicator_x', 'indicator_y', 'child']


def snapshot_frame(snapshot: Snapshot) -> pd.DataFrame:
    """Long-format table of a snapshot"""
    state = snapshot.state
    n_elem, n = state.fields.shape[:2]
    element, i, j = np.meshgrid(np.arange(n_elem), np.arange(n), np.arange(n), indexing='ij')
    frame = pd.DataFrame({
        'element': element.reshape(-1),
        'i': i.reshape(-1),
        'j': j.reshape(-1),
        'x': snapshot.x.reshape(-1),
        'y': snapshot.y.reshape(-1),
        'representation': np.repeat(state.flags.astype(np.int64), n * n),
        'indicator': np.repeat(state.indicator_values.astype(np.float64), n * n),
    })
    values = state.fields.reshape(-1, 4)
    for k, name in enumerate(VARIABLES):
        frame[name] = values[:, k]
    return frame


def frame_to_snapshot(frame: pd.DataFrame, metadata: Dict[str, object]) -> Snapshot:
    """
    Rebuild a snapshot from its long-format table

    Raises:
        StorageError: missing columns or incomplete element blocks
    """
    missing = [c for c in ['element', 'i', 'j', 'x', 'y', 'representation', 'indicator'] + VARIABLES
               if c not in frame.columns]
    if missing:
        raise StorageError(f"Snapshot table lacks columns {missing}")
    frame = frame.sort_values(['element', 'i', 'j'], kind='stable')
    n = int(frame['i'].max()) + 1
    n_elem = int(frame['element'].max()) + 1
    if len(frame) != n_elem * n * n:
        raise StorageError(f"Snapshot table has {len(frame)} rows, expected {n_elem * n * n}")

    fields = frame[VARIABLES].to_numpy(dtype=np.float64).reshape(n_elem, n, n, 4)
    per_element = frame.groupby('element', sort=True).first()
    state = HybridState(
        fields=fields,
        flags=per_element['representation'].to_numpy(dtype=np.int8),
        indicator_values=per_element['indicator'].to_numpy(dtype=np.float64),
        time=float(metadata.get('time', 0.0)),
        step=int(metadata.get('step', 0)),
    )
    return Snapshot(
        state=state,
        x=frame['x'].to_numpy(dtype=np.float64).reshape(n_elem, n, n),
        y=frame['y'].to_numpy(dtype=np.float64).reshape(n_elem, n, n),
        case=str(metadata.get('case', '')),
        metadata=dict(metadata),
    )


def edge_map_frame(edge_maps: Dict[int, np.ndarray]) -> pd.DataFrame:
    rows = []
    for element in sorted(edge_maps):
        emap = np.asarray(edge_maps[element])
        ii, jj = np.meshgrid(np.arange(emap.shape[0]), np.arange(emap.shape[1]), indexing='ij')
        rows.append(pd.DataFrame({
            'element': element,
            'i': ii.reshape(-1),
            'j': jj.reshape(-1),
            'edge': emap.reshape(-1).astype(np.int64),
        }))
    if not rows:
        return pd.DataFrame(columns=['element', 'i', 'j', 'edge'])
    return pd.concat(rows, ignore_index=True)


def edge_maps_from_frame(frame: pd.DataFrame) -> Dict[int, np.ndarray]:
    maps = {}
    for element, group in frame.groupby('element', sort=True):
        n = int(group['i'].max()) + 1
        emap = np.zeros((n, n), dtype=np.uint8)
        emap[group['i'].to_numpy(), group['j'].to_numpy()] = group['edge'].to_numpy()
        maps[int(element)] = emap
    return maps


def write_vtk(path: Path, frame: pd.DataFrame, title: str) -> None:
    """Legacy VTK polydata of the solution points"""
    rho = frame['rho'].to_numpy()
    state = frame[VARIABLES].to_numpy()
    p = pressure(state, check=False)
    n_points = len(frame)
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET POLYDATA",
        f"POINTS {n_points} double",
    ]
    lines += [f"{x!r} {y!r} 0.0" for x, y in zip(frame['x'].to_numpy(), frame['y'].to_numpy())]
    lines.append(f"VERTICES {n_points} {2 * n_points}")
    lines += [f"1 {k}" for k in range(n_points)]
    lines.append(f"POINT_DATA {n_points}")
    for name, values in (('density', rho), ('pressure', p), ('representation', frame['representation'].to_numpy())):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [repr(float(v)) for v in values]
    path.write_text("\n".join(lines) + "\n")


class FileStorage(SnapshotStorage):
    """
    File-based snapshot storage

    Stores snapshots on the local filesystem next to their JSON metadata
    """

    def __init__(self, base_path: Union[str, Path] = "./output"):
        """
        Initialize file storage

        Args:
            base_path: Base directory for storing snapshots
        """
        self.base_path = Path(base_path)
        self.base_path.mkdir(parents=True, exist_ok=True)
        self.logger = get_logger("FileStorage")

    def _get_file_path(self, key: str, suffix: str) -> Path:
        return self.base_path / f"{key}{suffix}"

    def save_snapshot(self, key: str, snapshot: Snapshot, formats: Sequence[str] = ("csv",)) -> List[str]:
        """Save a snapshot in the requested formats"""
        try:
            frame = snapshot_frame(snapshot)
            written = []
            for fmt in formats:
                if fmt == "csv":
                    path = self._get_file_path(key, ".csv")
                    frame.to_csv(path, index=False)
                elif fmt == "parquet":
                    path = self._get_file_path(key, ".parquet")
                    pq.write_table(pa.Table.from_pandas(frame, preserve_index=False), path, compression='snappy')
                elif fmt == "vtk":
                    path = self._get_file_path(key, ".vtk")
                    write_vtk(path, frame, f"{snapshot.case} t={snapshot.state.time}")
                else:
                    raise ValueError(f"Unknown snapshot format: {fmt}")
                written.append(str(path))

            if snapshot.edge_maps:
                path = self._get_file_path(key, "_edges.csv")
                edge_map_frame(snapshot.edge_maps).to_csv(path, index=False)
                written.append(str(path))

            metadata = {
                'case': snapshot.case,
                'time': snapshot.state.time,
                'step': snapshot.state.step,
                'degree': snapshot.degree,
                'n_elements': snapshot.state.n_elements,
                'fv_elements': int(np.sum(snapshot.state.fv_mask)),
                'formats': list(formats),
                'custom_metadata': snapshot.metadata,
            }
            with open(self._get_file_path(key, ".meta.json"), 'w') as f:
                json.dump(metadata, f, indent=2, default=str)

            self.logger.info(f"Saved snapshot {key} (t={snapshot.state.time:.6g}, step {snapshot.state.step})")
            return written

        except Exception as e:
            raise StorageError(f"Failed to save snapshot {key}: {e}") from e

    def load_snapshot(self, key: str) -> Snapshot:
        """Load a snapshot from its CSV (or Parquet) table"""
        csv_path = self._get_file_path(key, ".csv")
        parquet_path = self._get_file_path(key, ".parquet")
        if not csv_path.exists() and not parquet_path.exists():
            raise KeyError(f"Key not found: {key}")
        try:
            if csv_path.exists():
                frame = pd.read_csv(csv_path, float_precision="round_trip")
            else:
                frame = pq.read_table(parquet_path).to_pandas()

            metadata: Dict[str, object] = {}
            metadata_path = self._get_file_path(key, ".meta.json")
            if metadata_path.exists():
                with open(metadata_path, 'r') as f:
                    metadata = json.load(f)

            snapshot = frame_to_snapshot(frame, metadata)
            edges_path = self._get_file_path(key, "_edges.csv")
            if edges_path.exists():
                snapshot.edge_maps = edge_maps_from_frame(pd.read_csv(edges_path))
            self.logger.info(f"Loaded snapshot {key} ({snapshot.state.n_elements} elements)")
            return snapshot

        except StorageError:
            raise
        except Exception as e:
            raise StorageError(f"Failed to load snapshot {key}: {e}") from e

    def exists(self, key: str) -> bool:
        return self._get_file_path(key, ".csv").exists() or self._get_file_path(key, ".parquet").exists()

    def list_keys(self, prefix: Optional[str] = None) -> List[str]:
        """Snapshot keys in name order"""
        pattern = f"{prefix or ''}*.meta.json"
        return sorted(p.name[:-len(".meta.json")] for p in self.base_path.glob(pattern))


def load_snapshot_file(path: Union[str, Path]) -> Snapshot:
    """
    Load a snapshot given any of its files

    Raises:
        StorageError: the snapshot does not exist or cannot be read
    """
    path = Path(path)
    name = path.name
    for suffix in (".meta.json", "_edges.csv", ".csv", ".parquet", ".vtk"):
        if name.endswith(suffix):
            name = name[:-len(suffix)]
            break
    try:
        return FileStorage(path.parent).load_snapshot(name)
    except KeyError as e:
        raise StorageError(f"Snapshot not found: {path}") from e


def write_refine_plan(plan: RefinePlan, path: Union[str, Path]) -> Path:
    """Whitespace-separated text table of a refinement plan"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [[e.element_id, e.level, e.split.value, e.indicator_x, e.indicator_y, e.child] for e in plan.entries],
        columns=PLAN_COLUMNS,
    )
    header = f"# thresholds {plan.thresholds[0]} {plan.thresholds[1]}\n"
    body = frame.to_string(index=False) if len(frame) else " ".join(PLAN_COLUMNS)
    path.write_text(header + body + "\n")
    return path


def read_refine_plan(path: Union[str, Path]) -> RefinePlan:
    """
    Raises:
        StorageError: unreadable plan file
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
        thresholds = tuple(float(v) for v in lines[0].split()[2:4])
        rows = [line.split() for line in lines[2:] if line.strip()]
        entries = [
            RefineEntry(
                element_id=int(r[0]),
                level=int(r[1]),
                split=SplitKind(r[2]),
                indicator_x=float(r[3]),
                indicator_y=float(r[4]),
                child=int(r[5]),
            )
            for r in rows
        ]
    except Exception as e:
        raise StorageError(f"Failed to read refinement plan {path}: {e}") from e
    return RefinePlan(entries=entries, thresholds=thresholds)
