"""
Per-frame motion descriptors computed from dense flow.

Two extractors share one protocol: the histogram of magnitude and direction
(11 + 8 values) and the plain averaged flow (mean u, mean v).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, List, Optional, Protocol, Sequence, Union

import numpy as np
from tqdm import tqdm

from .config import FeatureParams
from .errors import IndexOutOfRange
from .models import HOD_BINS, HOM_BINS, AveragedFlowFeatures, FlowField, FrameFeatures

logger = logging.getLogger(__name__)

SECTOR_DEGREES = 360.0 / HOD_BINS

FeatureLike = Union[FrameFeatures, AveragedFlowFeatures]


def compute_features(
    flow: FlowField, frame: int, params: Optional[FeatureParams] = None
) -> FrameFeatures:
    """Histogram of flow magnitude and direction for one frame.

    Every finite pixel votes once into the magnitude bin whose half-open
    interval contains its magnitude. Pixels at or above the motion gate vote
    into one of eight 45-degree sectors, sector 0 centred on +u. Both
    histograms are normalized by their own vote counts; a frame where no
    pixel passes the gate has an all-zero direction histogram.

    With ``flip_v`` (the default) v is negated before ``atan2``, so screen-up
    (u=0, v=-1) is sector 2 and u=0, v=1 is sector 6. ``flip_v=False``
    (``--no-flip-v``) uses raw ``atan2(v, u)``, which puts u=0, v=1 in sector 2.
    """
    params = params or FeatureParams()
    u = flow.u.astype(np.float64).ravel()
    v = flow.v.astype(np.float64).ravel()
    finite = np.isfinite(u) & np.isfinite(v)
    u, v = u[finite], v[finite]

    magnitude = np.hypot(u, v)
    edges = np.asarray(params.mag_edges, dtype=np.float64)
    hom_index = np.searchsorted(edges, magnitude, side="right") - 1
    hom = np.bincount(hom_index, minlength=HOM_BINS).astype(np.float64)
    if magnitude.size:
        hom /= magnitude.size

    moving = magnitude >= params.motion_gate
    vertical = -v[moving] if params.flip_v else v[moving]
    angle = np.degrees(np.arctan2(vertical, u[moving]))
    hod_index = np.floor((angle + SECTOR_DEGREES / 2) / SECTOR_DEGREES).astype(np.int64)
    hod = np.bincount(hod_index % HOD_BINS, minlength=HOD_BINS).astype(np.float64)
    if moving.any():
        hod /= np.count_nonzero(moving)

    return FrameFeatures(frame=frame, hom=hom, hod=hod)


def averaged_flow_features(flow: FlowField, frame: int) -> AveragedFlowFeatures:
    """Mean of the horizontal and vertical flow components."""
    return AveragedFlowFeatures(
        frame=frame,
        u_mean=float(np.mean(flow.u, dtype=np.float64)),
        v_mean=float(np.mean(flow.v, dtype=np.float64)),
    )


def feature_matrix(features: Union[Sequence[Any], np.ndarray]) -> np.ndarray:
    """Stack clustering vectors into an (N, D) float array."""
    if isinstance(features, np.ndarray):
        matrix = np.asarray(features, dtype=np.float64)
        return matrix.reshape(-1, 1) if matrix.ndim == 1 else matrix
    if len(features) == 0:
        return np.zeros((0, 0), dtype=np.float64)
    return np.vstack([np.asarray(f.vector, dtype=np.float64) for f in features])


def _central_differences(matrix: np.ndarray, lo: int, hi: int) -> np.ndarray:
    diff = matrix[lo + 1 : hi + 2] - matrix[lo - 1 : hi]
    return np.sqrt(np.sum(diff * diff, axis=1))


def gradient_profile(features: Union[Sequence[Any], np.ndarray]) -> np.ndarray:
    """G(i) for every frame; the two end frames have no gradient and hold NaN."""
    matrix = feature_matrix(features)
    n = matrix.shape[0]
    profile = np.full(n, np.nan)
    if n >= 3:
        profile[1 : n - 1] = _central_differences(matrix, 1, n - 2)
    return profile


def feature_gradient(features: Union[Sequence[Any], np.ndarray], i: int) -> float:
    """Euclidean norm of X(i+1) - X(i-1); the frame index is not part of X."""
    matrix = feature_matrix(features)
    n = matrix.shape[0]
    if not 1 <= i <= n - 2:
        raise IndexOutOfRange(f"Gradient needs 1 <= i <= {n - 2}, got {i}")
    return float(_central_differences(matrix, i, i)[0])


class FeatureExtractor(Protocol):
    """Protocol for per-frame feature extractors."""

    kind: str

    def extract(self, flow: FlowField, frame: int) -> Any:
        """Compute the descriptor of one frame."""
        ...


class HistogramFeatureExtractor:
    """Histogram of magnitude and direction (19 values)."""

    kind = "histogram"

    def __init__(self, params: Optional[FeatureParams] = None) -> None:
        self.params = params or FeatureParams()

    def extract(self, flow: FlowField, frame: int) -> FrameFeatures:
        return compute_features(flow, frame, self.params)


class AveragedFlowExtractor:
    """Mean flow vector (2 values)."""

    kind = "averaged"

    def extract(self, flow: FlowField, frame: int) -> AveragedFlowFeatures:
        return averaged_flow_features(flow, frame)


def create_extractor(
    kind: str = "histogram", params: Optional[FeatureParams] = None
) -> FeatureExtractor:
    """Create an extractor by name."""
    kind = kind.lower()
    if kind == "histogram":
        return HistogramFeatureExtractor(params)
    if kind == "averaged":
        return AveragedFlowExtractor()
    raise ValueError(f"Unknown feature kind: {kind}")


def extract_sequence(
    fields: Sequence[FlowField],
    extractor: Optional[FeatureExtractor] = None,
    workers: int = 1,
    show_progress: bool = False,
) -> List[Any]:
    """Extract features for every frame, in frame order.

    Frames are independent, so `workers > 1` maps them over a thread pool;
    the result is identical to sequential extraction.
    """
    extractor = extractor or HistogramFeatureExtractor()
    frames = range(len(fields))
    with tqdm(
        total=len(fields), desc="Extracting features", disable=not show_progress
    ) as pbar:
        if workers <= 1:
            results = []
            for flow, frame in zip(fields, frames):
                results.append(extractor.extract(flow, frame))
                pbar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = []
                for item in executor.map(extractor.extract, fields, frames):
                    results.append(item)
                    pbar.update(1)

    logger.info(f"Extracted {extractor.kind} features for {len(results)} frames")
    return results
