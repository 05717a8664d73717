"""
Binary PGM (P5) frames.
"""

from pathlib import Path
from typing import List, Tuple

import numpy as np
from PIL import Image

from superframes.errors import BadHeader, Truncated, UnsupportedMaxval
from superframes.flow_io.base import BaseReader, atomic_write
from superframes.models import FrameImage

_WHITESPACE = b" \t\r\n\v\f"


def _header_tokens(data: bytes, count: int) -> Tuple[List[bytes], int]:
    """Collect `count` whitespace-separated header tokens, skipping comments.

    Returns the tokens and the offset of the single whitespace byte that
    terminates the last one.
    """
    tokens: List[bytes] = []
    pos = 0
    size = len(data)
    while len(tokens) < count:
        while pos < size and data[pos] in _WHITESPACE:
            pos += 1
        if pos < size and data[pos : pos + 1] == b"#":
            while pos < size and data[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= size:
            raise BadHeader(f"Header ended after {len(tokens)} of {count} fields")
        start = pos
        while (
            pos < size
            and data[pos] not in _WHITESPACE
            and data[pos : pos + 1] != b"#"
        ):
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


class PgmReader(BaseReader[FrameImage]):
    """Reader for 8-bit binary PGM frames."""

    suffix = ".pgm"

    def decode(self, data: bytes, source: Path) -> FrameImage:
        """Parse the P5 header and the raster that follows it."""
        if data[:2] != b"P5":
            raise BadHeader(f"{source}: not a binary PGM (magic {data[:2]!r})")

        tokens, end = _header_tokens(data[2:], 3)
        try:
            width, height, maxval = (int(t) for t in tokens)
        except ValueError as e:
            raise BadHeader(f"{source}: non-numeric header field") from e
        if width < 1 or height < 1:
            raise BadHeader(f"{source}: dimensions {width}x{height}")
        if not 1 <= maxval <= 255:
            raise UnsupportedMaxval(f"{source}: maxval {maxval} (only 1..255)")

        offset = 2 + end + 1
        if 2 + end >= len(data):
            raise Truncated(f"{source}: no raster after header")
        available = len(data) - offset
        if available < width * height:
            raise Truncated(
                f"{source}: raster has {available} bytes, header claims {width * height}"
            )

        pixels = np.frombuffer(
            data, dtype=np.uint8, count=width * height, offset=offset
        )
        return FrameImage(width=width, height=height, pixels=pixels)


def read_pgm(path: Path) -> FrameImage:
    """Read a binary PGM frame."""
    return PgmReader().read(path)


def write_pgm(image: FrameImage, path: Path) -> None:
    """Write a frame as binary PGM."""
    with atomic_write(path, "wb") as handle:
        Image.fromarray(np.ascontiguousarray(image.pixels)).save(
            handle, format="PPM"
        )
