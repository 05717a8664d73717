"""
Configuration management for the superframe toolkit.
"""

import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

# Load environment variables
load_dotenv()

DEFAULT_MAG_EDGES: Tuple[float, ...] = (
    0.0,
    0.1,
    0.5,
    1.0,
    2.0,
    4.0,
    6.0,
    8.0,
    12.0,
    16.0,
    24.0,
    math.inf,
)


def round_half_up(value: float) -> int:
    """Round to the nearest integer with .5 going up (2.5 -> 3)."""
    return int(math.floor(value + 0.5))


class FeatureParams(BaseModel):
    """Histogram layout for per-frame flow descriptors."""

    model_config = ConfigDict(frozen=True)

    mag_edges: Tuple[float, ...] = DEFAULT_MAG_EDGES
    motion_gate: float = 0.1
    # Image rows grow downward; negating v makes screen-up 90 degrees.
    flip_v: bool = True

    @field_validator("mag_edges")
    @classmethod
    def _check_edges(cls, edges: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(edges) != 12:
            raise ValueError(f"mag_edges needs 12 values, got {len(edges)}")
        if edges[0] != 0.0:
            raise ValueError("mag_edges must start at 0")
        if edges[-1] != math.inf:
            raise ValueError("mag_edges must end at +inf")
        if any(a >= b for a, b in zip(edges, edges[1:])):
            raise ValueError("mag_edges must be strictly ascending")
        return edges

    @field_validator("motion_gate")
    @classmethod
    def _check_gate(cls, gate: float) -> float:
        if not gate >= 0:
            raise ValueError("motion_gate must be >= 0")
        return gate


class SuperframeParams(BaseModel):
    """Parameters of the windowed clustering loop."""

    model_config = ConfigDict(frozen=True)

    k: int
    compactness: Optional[float] = None
    convergence_eps: float = 1e-3
    max_iters: int = 100
    min_length: Optional[int] = None

    @field_validator("k")
    @classmethod
    def _check_k(cls, k: int) -> int:
        if k < 1:
            raise ValueError("k must be at least 1")
        return k

    @field_validator("compactness")
    @classmethod
    def _check_compactness(cls, m: Optional[float]) -> Optional[float]:
        if m is not None and not m > 0:
            raise ValueError("compactness must be positive")
        return m

    @field_validator("convergence_eps")
    @classmethod
    def _check_eps(cls, eps: float) -> float:
        if not eps >= 0:
            raise ValueError("convergence_eps must be >= 0")
        return eps

    @field_validator("max_iters")
    @classmethod
    def _check_iters(cls, iters: int) -> int:
        if iters < 1:
            raise ValueError("max_iters must be at least 1")
        return iters

    @field_validator("min_length")
    @classmethod
    def _check_min_length(cls, length: Optional[int]) -> Optional[int]:
        if length is not None and length < 1:
            raise ValueError("min_length must be at least 1")
        return length

    def resolved_compactness(self) -> float:
        """Compactness m, defaulting to 10% of K."""
        return self.compactness if self.compactness is not None else 0.1 * self.k

    def interval(self, n_frames: int) -> float:
        """Nominal superframe length S = N / K."""
        return n_frames / self.k

    def resolved_min_length(self, n_frames: int) -> int:
        """Shortest surviving run, defaulting to max(2, round(S / 4))."""
        if self.min_length is not None:
            return self.min_length
        return max(2, round_half_up(self.interval(n_frames) / 4))


class PcParams(BaseModel):
    """Phase-correlation baseline parameters."""

    model_config = ConfigDict(frozen=True)

    crop: int = 240
    depth: int = 30
    stride: int = 2
    threshold: Optional[float] = None

    @field_validator("crop")
    @classmethod
    def _check_crop(cls, crop: int) -> int:
        if crop < 8:
            raise ValueError("crop must be at least 8")
        return crop

    @field_validator("depth")
    @classmethod
    def _check_depth(cls, depth: int) -> int:
        if depth < 2:
            raise ValueError("depth must be at least 2")
        return depth

    @field_validator("stride")
    @classmethod
    def _check_stride(cls, stride: int) -> int:
        if stride < 1:
            raise ValueError("stride must be at least 1")
        return stride

    @field_validator("threshold")
    @classmethod
    def _check_threshold(cls, threshold: Optional[float]) -> Optional[float]:
        if threshold is not None and not math.isfinite(threshold):
            raise ValueError("threshold must be finite")
        return threshold


class RunConfig(BaseModel):
    """Resolved inputs and outputs of one CLI invocation."""

    model_config = ConfigDict(frozen=True)

    subcommand: str
    flow_dir: Optional[Path] = None
    features_csv: Optional[Path] = None
    frame_dir: Optional[Path] = None
    output: Optional[Path] = None
    feature_kind: str = "histogram"
    features: FeatureParams = FeatureParams()
    superframe: Optional[SuperframeParams] = None
    pc: PcParams = PcParams()
    range_frac: float = 0.008
    beta_frac: float = 0.25

    @model_validator(mode="after")
    def _check_inputs(self) -> "RunConfig":
        given = [p for p in (self.flow_dir, self.features_csv, self.frame_dir) if p]
        if len(given) > 1:
            raise ValueError(
                "Input modes are mutually exclusive: give one of flow dir, "
                "feature CSV or frame dir"
            )
        if self.feature_kind not in ("histogram", "averaged"):
            raise ValueError(f"Unknown feature kind: {self.feature_kind}")
        if not 0 < self.range_frac < 1:
            raise ValueError("range_frac must lie in (0, 1)")
        if not 0 <= self.beta_frac < 1:
            raise ValueError("beta must lie in [0, 1)")
        return self


@dataclass
class Settings:
    """Process settings read from the environment."""

    log_level: str = "WARNING"
    workers: int = 1
    show_progress: bool = True

    def __init__(self) -> None:
        """Initialize settings from environment variables."""
        self.log_level = os.getenv("SUPERFRAME_LOG", self.log_level).upper()
        self.workers = int(os.getenv("SUPERFRAME_WORKERS", str(self.workers)))
        self.show_progress = (
            os.getenv("SUPERFRAME_PROGRESS", "true").lower() == "true"
        )

    def validate(self) -> None:
        """Validate settings."""
        if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"Invalid SUPERFRAME_LOG level: {self.log_level}")
        if self.workers < 1:
            raise ValueError("SUPERFRAME_WORKERS must be at least 1")


def configure_logging(settings: Optional[Settings] = None) -> Settings:
    """Install a basic log handler at the level named by SUPERFRAME_LOG."""
    settings = settings or Settings()
    settings.validate()
    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    logging.getLogger("superframes").setLevel(settings.log_level)
    return settings
