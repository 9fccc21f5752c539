"""
Snapshot and refinement-plan storage
"""
from .base import Snapshot, SnapshotStorage
from .file_storage import FileStorage, load_snapshot_file, read_refine_plan, write_refine_plan

__all__ = ['Snapshot', 'SnapshotStorage', 'FileStorage', 'load_snapshot_file', 'read_refine_plan', 'write_refine_plan']
