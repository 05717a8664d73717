"""
Data models for the superframe toolkit.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Iterator, List, Optional, Tuple

import numpy as np

from .errors import InvalidBoundaries, InvalidFieldError, OutOfRange

HOM_BINS = 11
HOD_BINS = 8


def _frozen_array(values: Any, dtype: Any, shape: Tuple[int, ...]) -> np.ndarray:
    array = np.array(values, dtype=dtype).reshape(shape)
    array.setflags(write=False)
    return array


def label_runs(labels: Iterable[int]) -> List[Tuple[int, int]]:
    """Split a label sequence into inclusive (start, end) runs of equal labels."""
    values = np.asarray(labels if isinstance(labels, np.ndarray) else list(labels))
    if values.size == 0:
        return []
    cuts = np.flatnonzero(values[1:] != values[:-1]) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts - 1, [values.size - 1]))
    return [(int(s), int(e)) for s, e in zip(starts, ends)]


@dataclass(frozen=True, eq=False)
class FlowField:
    """Dense 2-D motion vectors for one frame pair, stored as (height, width) planes."""

    width: int
    height: int
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self) -> None:
        """Validate dimensions and freeze the component planes."""
        if self.width < 1 or self.height < 1:
            raise InvalidFieldError(
                f"Flow dimensions must be positive, got {self.width}x{self.height}"
            )
        size = self.width * self.height
        u = np.asarray(self.u, dtype=np.float32)
        v = np.asarray(self.v, dtype=np.float32)
        if u.size != size or v.size != size:
            raise InvalidFieldError(
                f"Flow components need {size} values each, got u={u.size}, v={v.size}"
            )
        shape = (self.height, self.width)
        object.__setattr__(self, "u", _frozen_array(u, np.float32, shape))
        object.__setattr__(self, "v", _frozen_array(v, np.float32, shape))

    def __eq__(self, other: object) -> bool:
        """Bit-exact comparison of dimensions and both components."""
        if not isinstance(other, FlowField):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.u.tobytes() == other.u.tobytes()
            and self.v.tobytes() == other.v.tobytes()
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class FrameImage:
    """8-bit grayscale frame stored as a (height, width) array."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        """Validate dimensions and freeze the pixel array."""
        if self.width < 1 or self.height < 1:
            raise InvalidFieldError(
                f"Image dimensions must be positive, got {self.width}x{self.height}"
            )
        pixels = np.asarray(self.pixels)
        if pixels.size != self.width * self.height:
            raise InvalidFieldError(
                f"Image needs {self.width * self.height} pixels, got {pixels.size}"
            )
        object.__setattr__(
            self,
            "pixels",
            _frozen_array(pixels, np.uint8, (self.height, self.width)),
        )


@dataclass(frozen=True)
class BoundarySet:
    """First frame of every segment after the first, 0-based."""

    boundaries: Tuple[int, ...]
    n_frames: int

    def __post_init__(self) -> None:
        """Check range and strict ordering."""
        if self.n_frames < 1:
            raise InvalidBoundaries(f"n_frames must be positive, got {self.n_frames}")
        values = tuple(int(b) for b in self.boundaries)
        for b in values:
            if not 1 <= b <= self.n_frames - 1:
                raise OutOfRange(
                    f"Boundary {b} outside [1, {self.n_frames - 1}]"
                )
        if any(b >= c for b, c in zip(values, values[1:])):
            raise InvalidBoundaries(f"Boundaries must be strictly increasing: {values}")
        object.__setattr__(self, "boundaries", values)

    @classmethod
    def from_unsorted(cls, values: Iterable[int], n_frames: int) -> "BoundarySet":
        """Build a set from arbitrary indices, sorting and deduplicating them."""
        return cls(tuple(sorted(set(int(v) for v in values))), n_frames)

    def __len__(self) -> int:
        return len(self.boundaries)

    def __iter__(self) -> Iterator[int]:
        return iter(self.boundaries)


@dataclass(frozen=True, eq=False)
class FrameFeatures:
    """Histogram of magnitude and direction for one frame."""

    frame: int
    hom: np.ndarray
    hod: np.ndarray

    def __post_init__(self) -> None:
        """Validate bin counts and that every mass lies in [0, 1]."""
        hom = np.asarray(self.hom, dtype=np.float64)
        hod = np.asarray(self.hod, dtype=np.float64)
        if hom.size != HOM_BINS or hod.size != HOD_BINS:
            raise InvalidFieldError(
                f"Expected {HOM_BINS} HOM and {HOD_BINS} HOD bins, "
                f"got {hom.size} and {hod.size}"
            )
        if (hom < 0).any() or (hod < 0).any():
            raise InvalidFieldError(f"Negative histogram mass in frame {self.frame}")
        if not (np.isfinite(hom).all() and np.isfinite(hod).all()):
            raise InvalidFieldError(f"Non-finite histogram mass in frame {self.frame}")
        if (hom > 1.0).any() or (hod > 1.0).any():
            raise InvalidFieldError(f"Histogram mass above 1 in frame {self.frame}")
        object.__setattr__(self, "hom", _frozen_array(hom, np.float64, (HOM_BINS,)))
        object.__setattr__(self, "hod", _frozen_array(hod, np.float64, (HOD_BINS,)))

    @property
    def vector(self) -> np.ndarray:
        """The 19 clustering values, HOM followed by HOD."""
        return np.concatenate((self.hom, self.hod))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FrameFeatures):
            return NotImplemented
        return (
            self.frame == other.frame
            and np.array_equal(self.hom, other.hom)
            and np.array_equal(self.hod, other.hod)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class AveragedFlowFeatures:
    """Mean horizontal and vertical flow of one frame."""

    frame: int
    u_mean: float
    v_mean: float

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.u_mean, self.v_mean], dtype=np.float64)


@dataclass(frozen=True, eq=False)
class ClusterCenter:
    """Feature values plus a real-valued frame position."""

    features: np.ndarray
    position: float

    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        object.__setattr__(
            self, "features", _frozen_array(features, np.float64, (features.size,))
        )
        object.__setattr__(self, "position", float(self.position))

    def as_array(self) -> np.ndarray:
        """All components, features first and position last."""
        return np.append(self.features, self.position)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ClusterCenter):
            return NotImplemented
        return self.as_array().tobytes() == other.as_array().tobytes()

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Segmentation:
    """Per-frame labels with the clustering state that produced them."""

    labels: np.ndarray
    centers: Tuple[ClusterCenter, ...] = ()
    iterations: int = 0
    final_error: float = 0.0

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(
            self, "labels", _frozen_array(labels, np.int64, (labels.size,))
        )
        object.__setattr__(self, "centers", tuple(self.centers))

    @property
    def n_frames(self) -> int:
        return int(self.labels.size)

    @property
    def n_segments(self) -> int:
        """Number of contiguous runs (H)."""
        return len(self.runs())

    def runs(self) -> List[Tuple[int, int]]:
        return label_runs(self.labels)

    def __eq__(self, other: object) -> bool:
        """Bit-exact comparison, used to check determinism."""
        if not isinstance(other, Segmentation):
            return NotImplemented
        return (
            self.labels.tobytes() == other.labels.tobytes()
            and self.centers == other.centers
            and self.iterations == other.iterations
            and float(self.final_error).hex() == float(other.final_error).hex()
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class BoundaryMatch:
    """Outcome of matching one ground-truth boundary."""

    truth: int
    matched: Optional[int] = None
    distance: Optional[int] = None


@dataclass
class EvalReport:
    """Boundary recall and under-segmentation error for one video."""

    recall: float
    under_segmentation: float
    tp: int
    fn: int
    r_frames: int
    per_boundary: List[BoundaryMatch] = field(default_factory=list)
    empty_ground_truth: bool = False

    def to_dict(self) -> Dict[str, Any]:
        """Convert the report to a JSON-ready dictionary."""
        data: Dict[str, Any] = {
            "recall": self.recall,
            "under_segmentation": self.under_segmentation,
            "tp": self.tp,
            "fn": self.fn,
            "r_frames": self.r_frames,
            "per_boundary": [
                {"truth": m.truth, "matched": m.matched, "distance": m.distance}
                for m in self.per_boundary
            ],
        }
        if self.empty_ground_truth:
            data["empty_ground_truth"] = True
        return data

    def to_csv_row(self) -> str:
        """One-line CSV: recall,under_segmentation,tp,fn,r_frames."""
        return (
            f"{self.recall:.6f},{self.under_segmentation:.6f},"
            f"{self.tp},{self.fn},{self.r_frames}"
        )


@dataclass(frozen=True, eq=False)
class SpaceTimeVolume:
    """A stack of cropped grayscale frames, shape (depth, height, width)."""

    voxels: np.ndarray
    first_frame: int = 0
    crop_offset: Tuple[int, int] = (0, 0)

    def __post_init__(self) -> None:
        voxels = np.asarray(self.voxels, dtype=np.float64)
        if voxels.ndim != 3 or 0 in voxels.shape:
            raise InvalidFieldError(
                f"Volume must be a non-empty 3-D block, got {voxels.shape}"
            )
        object.__setattr__(
            self, "voxels", _frozen_array(voxels, np.float64, voxels.shape)
        )

    @property
    def depth(self) -> int:
        return int(self.voxels.shape[0])

    @property
    def height(self) -> int:
        return int(self.voxels.shape[1])

    @property
    def width(self) -> int:
        return int(self.voxels.shape[2])
