"""
Base classes for frame readers and writers.
"""

import logging
import os
import tempfile
from abc import ABC, abstractmethod
from contextlib import contextmanager
from pathlib import Path
from typing import Generic, IO, Iterator, TypeVar

from superframes.errors import IoFailure

logger = logging.getLogger(__name__)

T = TypeVar("T")


class BaseReader(ABC, Generic[T]):
    """Abstract base class for binary frame readers."""

    suffix: str = ""

    def read(self, file_path: Path) -> T:
        """Read and decode a whole file."""
        file_path = Path(file_path)
        if not file_path.exists():
            raise FileNotFoundError(f"File not found: {file_path}")

        data = file_path.read_bytes()
        return self.decode(data, source=file_path)

    @abstractmethod
    def decode(self, data: bytes, source: Path) -> T:
        """Decode file contents; raise a FormatError on malformed input."""
        ...


@contextmanager
def atomic_write(file_path: Path, mode: str = "wb", **kwargs: object) -> Iterator[IO]:
    """Write to a temporary sibling file and move it into place on success."""
    file_path = Path(file_path)
    try:
        file_path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=file_path.parent, prefix=f".{file_path.name}.", suffix=".tmp"
        )
    except OSError as e:
        raise IoFailure(f"Cannot write {file_path}: {e}") from e

    tmp_path = Path(tmp_name)
    try:
        with os.fdopen(fd, mode, **kwargs) as handle:  # type: ignore[call-overload]
            yield handle
        os.replace(tmp_path, file_path)
    except OSError as e:
        tmp_path.unlink(missing_ok=True)
        raise IoFailure(f"Cannot write {file_path}: {e}") from e
    except BaseException:
        tmp_path.unlink(missing_ok=True)
        raise
    logger.debug(f"Wrote {file_path}")
