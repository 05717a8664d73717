"""
Boundary recall and under-segmentation error.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple, Union

from .config import round_half_up
from .errors import FrameCountMismatch
from .models import BoundaryMatch, BoundarySet, EvalReport, Segmentation, label_runs

logger = logging.getLogger(__name__)

DEFAULT_RANGE_FRAC = 0.008
DEFAULT_BETA_FRAC = 0.25

Result = Union[Segmentation, BoundarySet]


def intervals_of(boundaries: BoundarySet) -> List[Tuple[int, int]]:
    """Inclusive (start, end) intervals partitioning 0..N-1 at the boundaries."""
    starts = [0] + list(boundaries)
    ends = [b - 1 for b in boundaries] + [boundaries.n_frames - 1]
    return list(zip(starts, ends))


def _as_boundaries(result: Result) -> BoundarySet:
    if isinstance(result, BoundarySet):
        return result
    starts = tuple(start for start, _ in label_runs(result.labels)[1:])
    return BoundarySet(starts, result.n_frames)


def _as_intervals(result: Result) -> List[Tuple[int, int]]:
    if isinstance(result, BoundarySet):
        return intervals_of(result)
    return label_runs(result.labels)


def _check_lengths(result_frames: int, truth_frames: int) -> None:
    if result_frames != truth_frames:
        raise FrameCountMismatch(
            f"Result covers {result_frames} frames but ground truth covers {truth_frames}"
        )


def tolerance_frames(n_frames: int, range_frac: float = DEFAULT_RANGE_FRAC) -> int:
    """Matching tolerance r = max(1, round(range_frac * N))."""
    return max(1, round_half_up(range_frac * n_frames))


def boundary_recall(
    result: Result, truth: BoundarySet, range_frac: float = DEFAULT_RANGE_FRAC
) -> EvalReport:
    """Match ground-truth boundaries to result boundaries one-to-one.

    Ground-truth boundaries are visited in ascending order; each takes the
    nearest unused result boundary within r frames, the smaller index on
    ties. The returned report has under_segmentation left at 0.
    """
    found = _as_boundaries(result)
    _check_lengths(found.n_frames, truth.n_frames)
    r = tolerance_frames(truth.n_frames, range_frac)

    unused = list(found)
    matches: List[BoundaryMatch] = []
    for g in truth:
        in_range = [s for s in unused if abs(s - g) <= r]
        if not in_range:
            matches.append(BoundaryMatch(truth=g))
            continue
        best = min(in_range, key=lambda s: (abs(s - g), s))
        unused.remove(best)
        matches.append(BoundaryMatch(truth=g, matched=best, distance=abs(best - g)))

    tp = sum(1 for m in matches if m.matched is not None)
    fn = len(matches) - tp
    if not matches:
        logger.warning("Ground truth has no boundaries; recall reported as 1.0")
        return EvalReport(
            recall=1.0,
            under_segmentation=0.0,
            tp=0,
            fn=0,
            r_frames=r,
            per_boundary=[],
            empty_ground_truth=True,
        )
    return EvalReport(
        recall=tp / (tp + fn),
        under_segmentation=0.0,
        tp=tp,
        fn=fn,
        r_frames=r,
        per_boundary=matches,
    )


def undersegmentation_error(
    result: Result, truth: BoundarySet, beta_frac: float = DEFAULT_BETA_FRAC
) -> float:
    """Leakage of result segments across ground-truth segments, as a fraction of N.

    Every pair (g, s) whose overlap exceeds beta * |s| adds
    min(|s & g|, |s - g|); the sum is divided by N.
    """
    segments = _as_intervals(result)
    n = segments[-1][1] + 1 if segments else 0
    _check_lengths(n, truth.n_frames)

    total = 0
    for g_start, g_end in intervals_of(truth):
        for s_start, s_end in segments:
            size = s_end - s_start + 1
            overlap = min(g_end, s_end) - max(g_start, s_start) + 1
            if overlap > 0 and overlap > beta_frac * size:
                total += min(overlap, size - overlap)
    return total / truth.n_frames


def evaluate(
    result: Result,
    truth: BoundarySet,
    range_frac: float = DEFAULT_RANGE_FRAC,
    beta_frac: float = DEFAULT_BETA_FRAC,
) -> EvalReport:
    """Recall and under-segmentation error in one report."""
    report = boundary_recall(result, truth, range_frac)
    return dataclasses.replace(
        report, under_segmentation=undersegmentation_error(result, truth, beta_frac)
    )


@dataclass
class SummaryReport:
    """Metrics averaged over several videos."""

    videos: int
    recall: float
    under_segmentation: float
    tp: int
    fn: int

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


def mean_report(reports: Sequence[EvalReport]) -> SummaryReport:
    """Average recall and UE over videos.

    Videos without ground-truth boundaries are left out of the recall mean.
    """
    if not reports:
        raise ValueError("No reports to average")
    scored = [r.recall for r in reports if not r.empty_ground_truth]
    recall = sum(scored) / len(scored) if scored else 1.0
    return SummaryReport(
        videos=len(reports),
        recall=recall,
        under_segmentation=sum(r.under_segmentation for r in reports) / len(reports),
        tp=sum(r.tp for r in reports),
        fn=sum(r.fn for r in reports),
    )
