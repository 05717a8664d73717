"""
Middlebury .flo reader and writer.

Layout (little-endian): float32 magic 202021.25, int32 width, int32 height,
then width*height interleaved (u, v) float32 pairs in row-major order.
"""

import logging
from pathlib import Path

import numpy as np

from superframes.errors import BadMagic, InvalidFieldError, NonPositiveDims, Truncated
from superframes.flow_io.base import BaseReader, atomic_write
from superframes.models import FlowField

logger = logging.getLogger(__name__)

FLO_MAGIC = np.float32(202021.25)
HEADER_SIZE = 12


class FloReader(BaseReader[FlowField]):
    """Reader for Middlebury flow files."""

    suffix = ".flo"

    def decode(self, data: bytes, source: Path) -> FlowField:
        """Parse header and interleaved payload."""
        if len(data) < 4:
            raise Truncated(f"{source}: {len(data)} bytes, no magic number")
        magic = np.frombuffer(data, dtype="<f4", count=1)[0]
        if magic != FLO_MAGIC:
            raise BadMagic(f"{source}: magic {magic!r} is not a .flo file")
        if len(data) < HEADER_SIZE:
            raise Truncated(f"{source}: header needs {HEADER_SIZE} bytes")

        width, height = (int(x) for x in np.frombuffer(data, "<i4", count=2, offset=4))
        if width < 1 or height < 1:
            raise NonPositiveDims(f"{source}: dimensions {width}x{height}")

        count = 2 * width * height
        expected = HEADER_SIZE + 4 * count
        if len(data) < expected:
            raise Truncated(
                f"{source}: payload has {len(data) - HEADER_SIZE} bytes, "
                f"header claims {4 * count}"
            )
        if len(data) > expected:
            logger.warning(f"{source}: ignoring {len(data) - expected} trailing bytes")

        pairs = np.frombuffer(data, "<f4", count=count, offset=HEADER_SIZE)
        pairs = pairs.astype(np.float32).reshape(height, width, 2)
        return FlowField(width=width, height=height, u=pairs[..., 0], v=pairs[..., 1])


def read_flo(path: Path) -> FlowField:
    """Read a Middlebury .flo file."""
    return FloReader().read(path)


def encode_flo(field: FlowField) -> bytes:
    """Serialize a flow field to .flo bytes."""
    if not isinstance(field, FlowField):
        raise InvalidFieldError(f"Expected a FlowField, got {type(field).__name__}")
    if field.u.shape != (field.height, field.width) or field.v.shape != field.u.shape:
        raise InvalidFieldError(
            f"Components {field.u.shape}/{field.v.shape} do not match "
            f"{field.width}x{field.height}"
        )
    header = (
        np.array([FLO_MAGIC], dtype="<f4").tobytes()
        + np.array([field.width, field.height], dtype="<i4").tobytes()
    )
    payload = np.stack((field.u, field.v), axis=-1).astype("<f4").tobytes()
    return header + payload


def write_flo(field: FlowField, path: Path) -> None:
    """Write a flow field as a Middlebury .flo file."""
    data = encode_flo(field)
    with atomic_write(path, "wb") as handle:
        handle.write(data)
