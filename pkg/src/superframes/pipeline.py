"""
Pipeline that coordinates loading, feature extraction, segmentation and evaluation.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .config import FeatureParams, SuperframeParams
from .features import create_extractor, extract_sequence
from .flow_io.factory import FrameSequenceLoader
from .flow_io.tables import load_feature_table, read_boundaries
from .metrics import DEFAULT_BETA_FRAC, DEFAULT_RANGE_FRAC, evaluate
from .models import BoundarySet, EvalReport, FlowField, FrameImage, Segmentation
from .superframe import run

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    """Metrics for one requested cluster count."""

    k: int
    h: int
    recall: float
    under_segmentation: float

    def to_row(self) -> List[Any]:
        return [self.k, self.h, f"{self.recall:.6f}", f"{self.under_segmentation:.6f}"]


class SuperframePipeline:
    """Main pipeline class."""

    def __init__(
        self,
        kind: str = "histogram",
        feature_params: Optional[FeatureParams] = None,
        workers: int = 1,
        show_progress: bool = False,
    ):
        """
        Initialize the pipeline.

        Args:
            kind: Feature extractor name, "histogram" or "averaged"
            feature_params: Histogram layout for the histogram extractor
            workers: Threads used for per-frame feature extraction
            show_progress: Show tqdm progress bars
        """
        self.loader = FrameSequenceLoader()
        self.extractor = create_extractor(kind, feature_params)
        self.workers = workers
        self.show_progress = show_progress

    def load_flow(self, flow_dir: Path) -> List[FlowField]:
        """Read every .flo file of a directory in name order."""
        return self.loader.load(Path(flow_dir), ".flo")

    def load_frames(self, frame_dir: Path) -> List[FrameImage]:
        """Read every .pgm file of a directory in name order."""
        return self.loader.load(Path(frame_dir), ".pgm")

    def extract(self, fields: Sequence[FlowField]) -> List[Any]:
        """Per-frame features, frame index = position in the sequence."""
        return extract_sequence(
            fields,
            self.extractor,
            workers=self.workers,
            show_progress=self.show_progress,
        )

    def features_from_flow(self, flow_dir: Path) -> List[Any]:
        """Load a flow directory and extract its features."""
        return self.extract(self.load_flow(flow_dir))

    def load_features(
        self, features_csv: Optional[Path] = None, flow_dir: Optional[Path] = None
    ) -> List[Any]:
        """Features from a precomputed table or computed from a flow directory."""
        if (features_csv is None) == (flow_dir is None):
            raise ValueError("Give exactly one of a feature table or a flow directory")
        if features_csv is not None:
            features = list(load_feature_table(Path(features_csv)))
            logger.info(f"Loaded {len(features)} feature rows from {features_csv}")
            return features
        return self.features_from_flow(Path(flow_dir))  # type: ignore[arg-type]

    def segment(
        self, features: Sequence[Any], params: SuperframeParams
    ) -> Segmentation:
        """Cluster features into superframes."""
        return run(features, params)

    def evaluate(
        self,
        seg: Segmentation,
        truth: BoundarySet,
        range_frac: float = DEFAULT_RANGE_FRAC,
        beta_frac: float = DEFAULT_BETA_FRAC,
    ) -> EvalReport:
        """Score a segmentation against ground truth."""
        return evaluate(seg, truth, range_frac, beta_frac)

    def read_truth(self, truth_path: Path, n_frames: int) -> BoundarySet:
        """Read a ground-truth boundary file for a video of n_frames."""
        return read_boundaries(Path(truth_path), n_frames)

    def sweep(
        self,
        features: Sequence[Any],
        truth: BoundarySet,
        k_list: Sequence[int],
        overrides: Optional[Dict[str, Any]] = None,
        range_frac: float = DEFAULT_RANGE_FRAC,
        beta_frac: float = DEFAULT_BETA_FRAC,
    ) -> List[SweepRow]:
        """Segment and evaluate once per K.

        `overrides` holds SuperframeParams fields other than k that apply to
        every run; compactness left unset follows each K.
        """
        if not k_list:
            raise ValueError("k_list must not be empty")
        rows = []
        for k in k_list:
            params = SuperframeParams(k=k, **(overrides or {}))
            seg = self.segment(features, params)
            report = self.evaluate(seg, truth, range_frac, beta_frac)
            rows.append(
                SweepRow(
                    k=k,
                    h=seg.n_segments,
                    recall=report.recall,
                    under_segmentation=report.under_segmentation,
                )
            )
            logger.info(
                f"K={k}: H={seg.n_segments}, recall={report.recall:.4f}, "
                f"UE={report.under_segmentation:.4f}"
            )
        return rows
