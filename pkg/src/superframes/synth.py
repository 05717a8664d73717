"""
Synthetic flow sequences with known superframe boundaries.
"""

import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from .errors import SpecInvalid
from .flow_io.flo import write_flo
from .flow_io.tables import write_boundaries
from .models import BoundarySet, FlowField

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

logger = logging.getLogger(__name__)

BENCHMARK_FLOWS = (
    (2.0, 0.0),
    (0.0, 2.0),
    (-2.0, 0.0),
    (0.0, -2.0),
    (1.5, 1.5),
    (-1.5, 1.5),
)

BOUNDARY_FILE = "boundaries.txt"


class SegmentSpec(BaseModel):
    """One run of frames sharing a flow pattern.

    With `alt_flow` set, pixels where row + column is odd move with that
    vector instead, so the segment mean can match another segment while the
    distribution differs.
    """

    model_config = ConfigDict(frozen=True)

    length: int
    flow_u: float
    flow_v: float
    alt_flow: Optional[Tuple[float, float]] = None


class SynthSpec(BaseModel):
    """Description of a synthetic flow sequence."""

    model_config = ConfigDict(frozen=True)

    n_frames: int
    segments: List[SegmentSpec]
    noise_sigma: float = 0.0
    width: int = 64
    height: int = 64
    seed: int = 0


def validate_spec(spec: SynthSpec) -> None:
    """Raise SpecInvalid unless the segments tile the sequence exactly."""
    if spec.n_frames < 1:
        raise SpecInvalid(f"n_frames must be positive, got {spec.n_frames}")
    if not spec.segments:
        raise SpecInvalid("At least one segment is required")
    if any(s.length < 1 for s in spec.segments):
        raise SpecInvalid("Segment lengths must be positive")
    total = sum(s.length for s in spec.segments)
    if total != spec.n_frames:
        raise SpecInvalid(f"Segment lengths sum to {total}, expected {spec.n_frames}")
    if not spec.noise_sigma >= 0:
        raise SpecInvalid(f"noise_sigma must be >= 0, got {spec.noise_sigma}")
    if spec.width < 1 or spec.height < 1:
        raise SpecInvalid(
            f"Field size must be positive, got {spec.width}x{spec.height}"
        )


def _base_planes(
    segment: SegmentSpec, height: int, width: int
) -> Tuple[np.ndarray, np.ndarray]:
    u = np.full((height, width), segment.flow_u, dtype=np.float64)
    v = np.full((height, width), segment.flow_v, dtype=np.float64)
    if segment.alt_flow is not None:
        rows, cols = np.indices((height, width))
        odd = (rows + cols) % 2 == 1
        u[odd], v[odd] = segment.alt_flow
    return u, v


def generate(spec: SynthSpec) -> Tuple[List[FlowField], BoundarySet]:
    """Generate the flow fields and their ground-truth boundaries.

    Noise comes from numpy's PCG64 generator seeded with `spec.seed`. Draws
    are made frame by frame, the u plane before the v plane, each in
    row-major order.
    """
    validate_spec(spec)
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    shape = (spec.height, spec.width)

    fields: List[FlowField] = []
    starts: List[int] = []
    for segment in spec.segments:
        starts.append(len(fields))
        base_u, base_v = _base_planes(segment, *shape)
        for _ in range(segment.length):
            u = base_u + spec.noise_sigma * rng.standard_normal(shape)
            v = base_v + spec.noise_sigma * rng.standard_normal(shape)
            fields.append(
                FlowField(
                    width=spec.width,
                    height=spec.height,
                    u=u.astype(np.float32),
                    v=v.astype(np.float32),
                )
            )

    boundaries = BoundarySet(tuple(starts[1:]), spec.n_frames)
    logger.info(
        f"Generated {len(fields)} synthetic frames in {len(spec.segments)} segments"
    )
    return fields, boundaries


def benchmark_spec(seed: int = 0) -> SynthSpec:
    """Six 100-frame segments of distinct flow, sigma 0.1, 64x64 fields."""
    return SynthSpec(
        n_frames=600,
        segments=[
            SegmentSpec(length=100, flow_u=u, flow_v=v) for u, v in BENCHMARK_FLOWS
        ],
        noise_sigma=0.1,
        width=64,
        height=64,
        seed=seed,
    )


def load_spec(path: Path) -> SynthSpec:
    """Read a spec from a .json or .toml file."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    try:
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
        return SynthSpec.model_validate(data)
    except (
        UnicodeDecodeError,
        json.JSONDecodeError,
        tomllib.TOMLDecodeError,
        ValidationError,
    ) as e:
        raise SpecInvalid(f"{path}: {e}") from e


def frame_name(index: int) -> str:
    return f"frame_{index:05d}.flo"


def write_sequence(
    fields: List[FlowField], boundaries: BoundarySet, out_dir: Path
) -> List[Path]:
    """Write `frame_00000.flo`, ... and `boundaries.txt` into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    truth = out_dir / BOUNDARY_FILE
    try:
        for index, field in enumerate(fields):
            path = out_dir / frame_name(index)
            write_flo(field, path)
            written.append(path)
        write_boundaries(boundaries, truth)
        written.append(truth)
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    logger.info(f"Wrote {len(fields)} flow files and {truth.name} to {out_dir}")
    return written
