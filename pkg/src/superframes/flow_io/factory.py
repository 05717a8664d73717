"""
Factory for loading frame sequences from directories.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from superframes.flow_io.base import BaseReader
from superframes.flow_io.flo import FloReader
from superframes.flow_io.pgm import PgmReader

logger = logging.getLogger(__name__)


class FrameSequenceLoader:
    """Loads a directory of per-frame files, delegating on file extension."""

    def __init__(self) -> None:
        """Initialize with the supported frame readers."""
        self.readers: Dict[str, BaseReader[Any]] = {
            ".flo": FloReader(),
            ".pgm": PgmReader(),
        }

    def is_supported(self, file_path: Path) -> bool:
        """Check if a file type is supported."""
        return file_path.suffix.lower() in self.readers

    def list_frames(self, directory: Path, suffix: str) -> List[Path]:
        """Sorted frame files with the given suffix; names must sort in frame order."""
        if not directory.exists():
            raise FileNotFoundError(f"Directory does not exist: {directory}")
        if not directory.is_dir():
            raise NotADirectoryError(f"Path is not a directory: {directory}")

        suffix = suffix.lower()
        if suffix not in self.readers:
            raise ValueError(f"Unsupported frame type: {suffix}")

        files = sorted(
            p for p in directory.iterdir() if p.is_file() and p.suffix.lower() == suffix
        )
        if not files:
            raise FileNotFoundError(f"No {suffix} files found in {directory}")
        return files

    def read(self, file_path: Path) -> Any:
        """Read one frame file."""
        file_extension = file_path.suffix.lower()
        if file_extension not in self.readers:
            raise ValueError(f"Unsupported file type: {file_extension}")
        return self.readers[file_extension].read(file_path)

    def load(
        self, directory: Path, suffix: str, files: Optional[List[Path]] = None
    ) -> List[Any]:
        """Read every frame of a directory in sorted order."""
        files = files if files is not None else self.list_frames(directory, suffix)
        frames = [self.read(p) for p in files]
        logger.info(f"Loaded {len(frames)} {suffix} frames from {directory}")
        return frames
