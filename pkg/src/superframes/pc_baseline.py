"""
Phase-correlation baseline.

Frames are subsampled, center-cropped and packed into non-overlapping
space-time volumes. Consecutive volumes are compared by the peak of their
normalized cross-power spectrum; a peak below the threshold marks a
boundary at the junction frame.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .config import PcParams
from .errors import DimensionMismatch, MixedDimensions
from .models import BoundarySet, FrameImage, SpaceTimeVolume

logger = logging.getLogger(__name__)

SPECTRUM_FLOOR = 1e-12

Shift = Tuple[int, int, int]


def build_volumes(
    frames: Sequence[FrameImage], params: PcParams
) -> List[SpaceTimeVolume]:
    """Pack every `stride`-th frame, center-cropped, into volumes of `depth` frames.

    A trailing group shorter than `depth` is dropped. When a frame is
    smaller than the crop, the largest centered square is used instead.
    """
    if not frames:
        raise ValueError("No frames to build volumes from")
    height, width = frames[0].height, frames[0].width
    for index, frame in enumerate(frames):
        if (frame.height, frame.width) != (height, width):
            raise MixedDimensions(
                f"Frame {index} is {frame.width}x{frame.height}, expected {width}x{height}"
            )

    side = min(params.crop, height, width)
    if side < params.crop:
        logger.warning(
            f"Frames are {width}x{height}; cropping {side}x{side} instead of "
            f"{params.crop}x{params.crop}"
        )
    top, left = (height - side) // 2, (width - side) // 2

    sampled = frames[:: params.stride]
    count = len(sampled) // params.depth
    dropped = len(sampled) - count * params.depth
    if dropped:
        logger.debug(f"Dropping {dropped} subsampled frames after the last full volume")

    volumes = []
    for group in range(count):
        members = sampled[group * params.depth : (group + 1) * params.depth]
        voxels = np.stack(
            [m.pixels[top : top + side, left : left + side] for m in members]
        )
        volumes.append(
            SpaceTimeVolume(
                voxels=voxels,
                first_frame=group * params.depth * params.stride,
                crop_offset=(top, left),
            )
        )
    logger.info(f"Built {len(volumes)} volumes of {side}x{side}x{params.depth}")
    return volumes


def _signed(index: int, size: int) -> int:
    return index - size if index > size // 2 else index


def phase_correlation(a: SpaceTimeVolume, b: SpaceTimeVolume) -> Tuple[float, Shift]:
    """Peak of the inverse normalized cross-power spectrum of two volumes.

    Both volumes are mean-subtracted first. Spectrum elements whose
    magnitude is below 1e-12 are zeroed, and the inverse transform is scaled
    by the share of elements kept so that a volume correlated with itself
    peaks at exactly 1. The shift is returned in (depth, row, column) order
    as the circular displacement taking `a` onto `b`.
    """
    if a.voxels.shape != b.voxels.shape:
        raise DimensionMismatch(
            f"Cannot correlate volumes of shape {a.voxels.shape} and {b.voxels.shape}"
        )

    fa = np.fft.fftn(a.voxels - a.voxels.mean())
    fb = np.fft.fftn(b.voxels - b.voxels.mean())
    cross = fa * np.conj(fb)
    magnitude = np.abs(cross)
    kept = magnitude >= SPECTRUM_FLOOR
    n_kept = int(np.count_nonzero(kept))
    if n_kept == 0:
        return 0.0, (0, 0, 0)

    spectrum = np.zeros_like(cross)
    spectrum[kept] = cross[kept] / magnitude[kept]
    surface = np.real(np.fft.ifftn(spectrum)) * (cross.size / n_kept)

    peak = np.unravel_index(int(np.argmax(surface)), surface.shape)
    shift = tuple(-_signed(int(p), n) for p, n in zip(peak, surface.shape))
    return float(surface[peak]), shift  # type: ignore[return-value]


def junction_frames(n_corrs: int, params: PcParams) -> List[int]:
    """Original-video frame where volume i+1 starts, for each correlation i."""
    return [(i + 1) * params.depth * params.stride for i in range(n_corrs)]


def segment_by_threshold(
    corrs: Sequence[float],
    params: PcParams,
    n_frames: int,
    threshold: Optional[float] = None,
) -> BoundarySet:
    """Boundaries at every junction whose correlation falls below the threshold."""
    threshold = params.threshold if threshold is None else threshold
    if threshold is None:
        raise ValueError("A threshold is required, either in PcParams or explicitly")
    junctions = junction_frames(len(corrs), params)
    return BoundarySet(
        tuple(j for j, c in zip(junctions, corrs) if c < threshold), n_frames
    )


def _segment_count(corrs: Sequence[float], threshold: float) -> int:
    return 1 + sum(1 for c in corrs if c < threshold)


def _candidates(corrs: Sequence[float]) -> List[float]:
    if not corrs:
        return [0.0]
    values = set(float(c) for c in corrs)
    values.add(min(0.0, min(values)))
    values.add(float(np.nextafter(max(values), np.inf)))
    return sorted(values)


@dataclass(frozen=True)
class ThresholdChoice:
    """Threshold solved for a target segment count."""

    threshold: float
    achieved_k: int
    saturated: bool


def threshold_for_k(corrs: Sequence[float], k_target: int) -> ThresholdChoice:
    """Smallest candidate threshold producing k_target segments.

    Candidates are the observed correlations, a lower sentinel of 0 (or the
    smallest correlation if negative) and a value just above the largest
    correlation. When no candidate gives k_target exactly, the closest count
    wins, fewer segments on ties, and the choice is flagged as saturated.
    """
    if k_target < 1:
        raise ValueError(f"k_target must be at least 1, got {k_target}")

    curve = threshold_curve(corrs)
    threshold, achieved = min(
        curve, key=lambda point: (abs(point[1] - k_target), point[1], point[0])
    )
    saturated = achieved != k_target
    if saturated:
        logger.warning(
            f"No threshold yields {k_target} segments; closest achievable is {achieved}"
        )
    return ThresholdChoice(
        threshold=threshold, achieved_k=achieved, saturated=saturated
    )


def threshold_curve(corrs: Sequence[float]) -> List[Tuple[float, int]]:
    """(threshold, segment count) for every candidate threshold, ascending."""
    return [(t, _segment_count(corrs, t)) for t in _candidates(corrs)]


@dataclass
class BaselineResult:
    """Output of one phase-correlation run."""

    n_frames: int
    corrs: List[float]
    junctions: List[int]
    boundaries: BoundarySet
    threshold: float
    choice: Optional[ThresholdChoice] = None
    shifts: List[Shift] = field(default_factory=list)


class PhaseCorrelationSegmenter:
    """Runs the baseline end to end on a frame sequence."""

    def __init__(
        self,
        params: Optional[PcParams] = None,
        workers: int = 1,
        show_progress: bool = False,
    ) -> None:
        self.params = params or PcParams()
        self.workers = workers
        self.show_progress = show_progress

    def correlate(
        self, volumes: Sequence[SpaceTimeVolume]
    ) -> List[Tuple[float, Shift]]:
        """Correlate each volume with the next; order matches the volume sequence."""
        pairs = list(zip(volumes[:-1], volumes[1:]))
        with tqdm(
            total=len(pairs), desc="Correlating volumes", disable=not self.show_progress
        ) as pbar:
            results = []
            if self.workers <= 1:
                for a, b in pairs:
                    results.append(phase_correlation(a, b))
                    pbar.update(1)
            else:
                with ThreadPoolExecutor(max_workers=self.workers) as executor:
                    for item in executor.map(lambda p: phase_correlation(*p), pairs):
                        results.append(item)
                        pbar.update(1)
        return results

    def run(
        self, frames: Sequence[FrameImage], k: Optional[int] = None
    ) -> BaselineResult:
        """Segment by the configured threshold, or by the threshold solved for k."""
        if k is None and self.params.threshold is None:
            raise ValueError("Either a threshold or a target k is required")

        volumes = build_volumes(frames, self.params)
        correlated = self.correlate(volumes)
        corrs = [c for c, _ in correlated]

        choice = None
        if k is not None:
            choice = threshold_for_k(corrs, k)
            threshold = choice.threshold
        else:
            threshold = float(self.params.threshold)  # type: ignore[arg-type]

        boundaries = segment_by_threshold(corrs, self.params, len(frames), threshold)
        logger.info(
            f"Phase correlation found {len(boundaries)} boundaries "
            f"over {len(volumes)} volumes at threshold {threshold:.6g}"
        )
        return BaselineResult(
            n_frames=len(frames),
            corrs=corrs,
            junctions=junction_frames(len(corrs), self.params),
            boundaries=boundaries,
            threshold=threshold,
            choice=choice,
            shifts=[s for _, s in correlated],
        )
