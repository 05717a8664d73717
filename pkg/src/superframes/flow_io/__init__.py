"""
Readers and writers for flow fields, frames and result tables.
"""

from .base import BaseReader, atomic_write
from .factory import FrameSequenceLoader
from .flo import FloReader, read_flo, write_flo
from .pgm import PgmReader, read_pgm, write_pgm
from .tables import (
    load_feature_table,
    read_averaged_csv,
    read_boundaries,
    read_feature_csv,
    sidecar_boundaries_path,
    write_averaged_csv,
    write_boundaries,
    write_feature_csv,
    write_json,
    write_rows,
    write_segmentation,
)

__all__ = [
    "BaseReader",
    "atomic_write",
    "FrameSequenceLoader",
    "FloReader",
    "read_flo",
    "write_flo",
    "PgmReader",
    "read_pgm",
    "write_pgm",
    "load_feature_table",
    "read_averaged_csv",
    "read_boundaries",
    "read_feature_csv",
    "sidecar_boundaries_path",
    "write_averaged_csv",
    "write_boundaries",
    "write_feature_csv",
    "write_json",
    "write_rows",
    "write_segmentation",
]
