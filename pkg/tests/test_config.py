"""
Tests for parameters, settings and how CLI options reach them.
"""

import math
import os
from unittest.mock import Mock, patch

import pytest
from click.testing import CliRunner
from pydantic import ValidationError
from superframes.cli import main
from superframes.config import (
    DEFAULT_MAG_EDGES,
    FeatureParams,
    PcParams,
    RunConfig,
    Settings,
    SuperframeParams,
    configure_logging,
    round_half_up,
)
from superframes.models import Segmentation


class TestRounding:
    """Tests for round_half_up."""

    @pytest.mark.parametrize(
        "value, expected", [(2.5, 3), (3.5, 4), (2.4999, 2), (0.0, 0), (4.8, 5)]
    )
    def test_half_goes_up(self, value, expected):
        """Test that .5 always rounds up."""
        assert round_half_up(value) == expected


class TestParams:
    """Tests for the parameter models."""

    def test_feature_defaults(self):
        """Test the default histogram layout."""
        params = FeatureParams()

        assert params.mag_edges == DEFAULT_MAG_EDGES
        assert params.mag_edges[-1] == math.inf
        assert params.motion_gate == 0.1
        assert params.flip_v

    @pytest.mark.parametrize(
        "edges",
        [
            (0.0, 1.0, math.inf),
            (1.0,) + DEFAULT_MAG_EDGES[1:],
            DEFAULT_MAG_EDGES[:-1] + (30.0,),
            (0.0, 0.5, 0.1) + DEFAULT_MAG_EDGES[3:],
        ],
    )
    def test_invalid_edges(self, edges):
        """Test edge lists that do not describe 11 ascending bins."""
        with pytest.raises(ValidationError):
            FeatureParams(mag_edges=edges)

    def test_superframe_defaults(self):
        """Test values derived from K and N."""
        params = SuperframeParams(k=12)

        assert params.resolved_compactness() == pytest.approx(1.2)
        assert params.interval(600) == 50.0
        assert params.resolved_min_length(600) == 13
        assert params.resolved_min_length(20) == 2

    def test_explicit_overrides(self):
        """Test that explicit values win over derived ones."""
        params = SuperframeParams(k=12, compactness=0.5, min_length=7)

        assert params.resolved_compactness() == 0.5
        assert params.resolved_min_length(600) == 7

    @pytest.mark.parametrize(
        "values",
        [
            {"k": 0},
            {"k": 2, "compactness": 0.0},
            {"k": 2, "convergence_eps": -1.0},
            {"k": 2, "max_iters": 0},
            {"k": 2, "min_length": 0},
        ],
    )
    def test_invalid_superframe_params(self, values):
        """Test out-of-range clustering parameters."""
        with pytest.raises(ValidationError):
            SuperframeParams(**values)

    def test_pc_defaults(self):
        """Test the baseline defaults."""
        params = PcParams()

        assert (params.crop, params.depth, params.stride) == (240, 30, 2)
        assert params.threshold is None

    @pytest.mark.parametrize(
        "values", [{"crop": 4}, {"depth": 1}, {"stride": 0}, {"threshold": math.nan}]
    )
    def test_invalid_pc_params(self, values):
        """Test out-of-range baseline parameters."""
        with pytest.raises(ValidationError):
            PcParams(**values)

    def test_run_config_inputs_are_exclusive(self, tmp_path):
        """Test that only one input mode may be given."""
        with pytest.raises(ValidationError):
            RunConfig(subcommand="segment", flow_dir=tmp_path, features_csv=tmp_path)

    def test_run_config_ranges(self):
        """Test tolerance and beta bounds."""
        with pytest.raises(ValidationError):
            RunConfig(subcommand="evaluate", range_frac=0.0)
        with pytest.raises(ValidationError):
            RunConfig(subcommand="evaluate", beta_frac=1.0)


class TestSettings:
    """Tests for environment settings."""

    def test_defaults(self):
        """Test settings with nothing in the environment."""
        with patch.dict(os.environ, {}, clear=True):
            settings = Settings()

        assert settings.log_level == "WARNING"
        assert settings.workers == 1
        assert settings.show_progress

    def test_from_environment(self):
        """Test reading SUPERFRAME_* variables."""
        env = {
            "SUPERFRAME_LOG": "debug",
            "SUPERFRAME_WORKERS": "4",
            "SUPERFRAME_PROGRESS": "false",
        }
        with patch.dict(os.environ, env, clear=True):
            settings = Settings()

        assert settings.log_level == "DEBUG"
        assert settings.workers == 4
        assert not settings.show_progress

    def test_invalid_workers(self):
        """Test a worker count below one."""
        with patch.dict(os.environ, {"SUPERFRAME_WORKERS": "0"}, clear=True):
            settings = Settings()

        with pytest.raises(ValueError, match="SUPERFRAME_WORKERS"):
            settings.validate()

    def test_configure_logging_rejects_unknown_level(self):
        """Test an unknown log level."""
        with patch.dict(os.environ, {"SUPERFRAME_LOG": "LOUD"}, clear=True):
            with pytest.raises(ValueError, match="SUPERFRAME_LOG"):
                configure_logging()


class TestOptionsReachParams:
    """Tests that CLI flags are passed through to the pipeline."""

    @pytest.fixture
    def runner(self):
        """Create a CLI test runner."""
        return CliRunner(env={"SUPERFRAME_PROGRESS": "false"})

    @patch("superframes.cli.SuperframePipeline")
    def test_segment_options(self, mock_pipeline_class, runner, tmp_path):
        """Test clustering flags on the segment command."""
        mock_pipeline = Mock()
        mock_pipeline.load_features.return_value = [Mock()] * 10
        mock_pipeline.segment.return_value = Segmentation(labels=[0] * 5 + [1] * 5)
        mock_pipeline_class.return_value = mock_pipeline
        flow_dir = tmp_path / "flow"

        result = runner.invoke(
            main,
            [
                "segment",
                "--flow-dir",
                str(flow_dir),
                "--k",
                "3",
                "--compactness",
                "0.5",
                "--max-iters",
                "7",
                "--min-length",
                "4",
                "--motion-gate",
                "0.2",
                "--out",
                str(tmp_path / "seg.csv"),
            ],
        )

        assert result.exit_code == 0
        assert "H: 2" in result.output
        params = mock_pipeline.segment.call_args[0][1]
        assert params == SuperframeParams(
            k=3, compactness=0.5, max_iters=7, min_length=4
        )
        kwargs = mock_pipeline_class.call_args[1]
        assert kwargs["kind"] == "histogram"
        assert kwargs["feature_params"].motion_gate == 0.2
        mock_pipeline.load_features.assert_called_once_with(
            features_csv=None, flow_dir=flow_dir
        )

    @patch("superframes.cli.SuperframePipeline")
    def test_features_no_flip_v(self, mock_pipeline_class, runner, tmp_path):
        """Test the raw direction convention flag."""
        mock_pipeline = Mock()
        mock_pipeline.features_from_flow.return_value = []
        mock_pipeline_class.return_value = mock_pipeline

        result = runner.invoke(
            main,
            [
                "features",
                str(tmp_path),
                "--no-flip-v",
                "--workers",
                "3",
                "--out",
                str(tmp_path / "f.csv"),
            ],
        )

        assert result.exit_code == 0
        kwargs = mock_pipeline_class.call_args[1]
        assert kwargs["feature_params"].flip_v is False
        assert kwargs["workers"] == 3
