"""
CLI interface for superframe segmentation.
"""

import json
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple

import click
from click.core import ParameterSource
from pydantic import ValidationError

from . import __version__
from .config import (
    FeatureParams,
    PcParams,
    RunConfig,
    Settings,
    SuperframeParams,
    configure_logging,
)
from .errors import FrameCountMismatch, SuperframeError
from .flow_io.tables import (
    read_boundaries,
    write_averaged_csv,
    write_boundaries,
    write_feature_csv,
    write_json,
    write_rows,
    write_segmentation,
)
from .metrics import evaluate as evaluate_result
from .models import AveragedFlowFeatures
from .pc_baseline import PhaseCorrelationSegmenter, threshold_curve
from .pipeline import SuperframePipeline
from .synth import benchmark_spec, generate, load_spec, write_sequence

SWEEP_HEADER = ["k", "h", "recall", "under_segmentation"]
COMPARE_HEADER = ["method", "k", "h", "recall", "under_segmentation"]

PATH = click.Path(path_type=Path)


@contextmanager
def handle_errors(written: List[Path]) -> Iterator[None]:
    """Turn domain failures into a clean exit 1, removing outputs already written."""
    try:
        yield
    except (
        SuperframeError,
        FileNotFoundError,
        NotADirectoryError,
        ValidationError,
        ValueError,
    ) as e:
        for path in written:
            path.unlink(missing_ok=True)
        raise click.ClickException(str(e)) from e


def parse_float_list(value: Optional[str]) -> Optional[Tuple[float, ...]]:
    """Parse "0,0.1,inf" into floats."""
    if value is None:
        return None
    try:
        return tuple(float(item) for item in value.split(","))
    except ValueError as e:
        raise click.BadParameter(
            f"expected comma-separated numbers, got {value!r}"
        ) from e


def _k_list(ctx: click.Context, param: click.Parameter, value: str) -> List[int]:
    items = [item.strip() for item in value.split(",") if item.strip()]
    if not items:
        raise click.BadParameter("at least one K is required")
    try:
        k_values = [int(item) for item in items]
    except ValueError as e:
        raise click.BadParameter(
            f"expected comma-separated integers, got {value!r}"
        ) from e
    if any(k < 1 for k in k_values):
        raise click.BadParameter("every K must be at least 1")
    return k_values


def _feature_params(
    motion_gate: float, mag_edges: Optional[str], flip_v: bool = True
) -> FeatureParams:
    values: Dict[str, Any] = {"motion_gate": motion_gate, "flip_v": flip_v}
    edges = parse_float_list(mag_edges)
    if edges is not None:
        values["mag_edges"] = edges
    return FeatureParams(**values)


def _superframe_overrides(
    compactness: Optional[float],
    eps: float,
    max_iters: int,
    min_length: Optional[int],
) -> Dict[str, Any]:
    return {
        "compactness": compactness,
        "convergence_eps": eps,
        "max_iters": max_iters,
        "min_length": min_length,
    }


def _require_one_input(features_csv: Optional[Path], flow_dir: Optional[Path]) -> None:
    if features_csv is None and flow_dir is None:
        raise click.UsageError("Give either --features CSV or --flow-dir DIR")


def _check_table_kind(
    ctx: click.Context, features_csv: Optional[Path], rows: List[Any], kind: str
) -> None:
    """Reject an explicit --kind that contradicts the loaded feature table."""
    if features_csv is None or not rows:
        return
    if ctx.get_parameter_source("kind") is not ParameterSource.COMMANDLINE:
        return
    averaged = isinstance(rows[0], AveragedFlowFeatures)
    table_kind = "averaged" if averaged else "histogram"
    if table_kind != kind.lower():
        raise click.UsageError(
            f"--kind {kind.lower()} does not match {features_csv}, "
            f"which holds {table_kind} features"
        )


def _settings(ctx: click.Context) -> Settings:
    return ctx.obj if isinstance(ctx.obj, Settings) else Settings()


def feature_options(func: Any) -> Any:
    """Histogram layout flags shared by several commands."""
    func = click.option(
        "--mag-edges",
        default=None,
        help="12 comma-separated magnitude bin edges, starting at 0 and ending at inf",
    )(func)
    func = click.option(
        "--motion-gate",
        type=float,
        default=0.1,
        show_default=True,
        help="Minimum magnitude for a pixel to vote for a direction",
    )(func)
    func = click.option(
        "--kind",
        type=click.Choice(["histogram", "averaged"], case_sensitive=False),
        default="histogram",
        show_default=True,
        help="Per-frame feature type; a --features table is read by its header",
    )(func)
    return func


def clustering_options(func: Any) -> Any:
    """Clustering flags shared by segment and sweep."""
    func = click.option(
        "--min-length",
        type=click.IntRange(min=1),
        default=None,
        help="Shortest surviving run",
    )(func)
    func = click.option(
        "--max-iters", type=click.IntRange(min=1), default=100, show_default=True
    )(func)
    func = click.option(
        "--eps",
        type=float,
        default=1e-3,
        show_default=True,
        help="Convergence threshold",
    )(func)
    func = click.option(
        "--compactness", type=float, default=None, help="Compactness m (default 0.1*K)"
    )(func)
    return func


@click.group()
@click.version_option(version=__version__)
@click.pass_context
def main(ctx: click.Context) -> None:
    """Superframe toolkit: segment videos into runs of homogeneous motion."""
    try:
        ctx.obj = configure_logging()
    except ValueError as e:
        raise click.ClickException(str(e)) from e


@main.command()
@click.argument("flow_dir", type=PATH)
@click.option(
    "--out", "out_csv", type=PATH, required=True, help="Feature CSV to write"
)
@feature_options
@click.option("--no-flip-v", is_flag=True, help="Use raw atan2(v, u) for directions")
@click.option(
    "--workers", type=click.IntRange(min=1), default=None, help="Extraction threads"
)
@click.pass_context
def features(
    ctx: click.Context,
    flow_dir: Path,
    out_csv: Path,
    kind: str,
    motion_gate: float,
    mag_edges: Optional[str],
    no_flip_v: bool,
    workers: Optional[int],
) -> None:
    """Compute per-frame features for a directory of .flo files."""
    settings = _settings(ctx)
    written: List[Path] = []
    with handle_errors(written):
        config = RunConfig(
            subcommand="features",
            flow_dir=flow_dir,
            output=out_csv,
            feature_kind=kind.lower(),
            features=_feature_params(motion_gate, mag_edges, not no_flip_v),
        )
        pipeline = SuperframePipeline(
            kind=config.feature_kind,
            feature_params=config.features,
            workers=workers or settings.workers,
            show_progress=settings.show_progress,
        )
        rows = pipeline.features_from_flow(flow_dir)
        if config.feature_kind == "averaged":
            write_averaged_csv(rows, out_csv)
        else:
            write_feature_csv(rows, out_csv)
        written.append(out_csv)

    click.echo(
        f"Wrote {len(rows)} frames of {config.feature_kind} features to {out_csv}"
    )


@main.command()
@click.option("--features", "features_csv", type=PATH, default=None, help="Feature CSV")
@click.option("--flow-dir", type=PATH, default=None, help="Directory of .flo files")
@click.option(
    "--k", type=click.IntRange(min=1), required=True, help="Number of clusters K"
)
@clustering_options
@feature_options
@click.option(
    "--out", "out_csv", type=PATH, required=True, help="Segmentation CSV to write"
)
@click.pass_context
def segment(
    ctx: click.Context,
    features_csv: Optional[Path],
    flow_dir: Optional[Path],
    k: int,
    compactness: Optional[float],
    eps: float,
    max_iters: int,
    min_length: Optional[int],
    kind: str,
    motion_gate: float,
    mag_edges: Optional[str],
    out_csv: Path,
) -> None:
    """Cluster frames into superframes."""
    _require_one_input(features_csv, flow_dir)
    settings = _settings(ctx)
    written: List[Path] = []
    with handle_errors(written):
        config = RunConfig(
            subcommand="segment",
            flow_dir=flow_dir,
            features_csv=features_csv,
            output=out_csv,
            feature_kind=kind.lower(),
            features=_feature_params(motion_gate, mag_edges),
            superframe=SuperframeParams(
                k=k, **_superframe_overrides(compactness, eps, max_iters, min_length)
            ),
        )
        pipeline = SuperframePipeline(
            kind=config.feature_kind,
            feature_params=config.features,
            workers=settings.workers,
            show_progress=settings.show_progress,
        )
        rows = pipeline.load_features(features_csv=features_csv, flow_dir=flow_dir)
        _check_table_kind(ctx, features_csv, rows, kind)
        seg = pipeline.segment(rows, config.superframe)  # type: ignore[arg-type]
        sidecar = write_segmentation(seg, out_csv)
        written.extend([out_csv, sidecar])

    click.echo(f"iterations: {seg.iterations}")
    click.echo(f"final_error: {seg.final_error:.6g}")
    click.echo(f"H: {seg.n_segments}")


@main.command()
@click.argument("frame_dir", type=PATH)
@click.option("--threshold", type=float, default=None, help="Correlation cutoff")
@click.option(
    "--k",
    type=click.IntRange(min=1),
    default=None,
    help="Solve the threshold for K",
)
@click.option("--crop", type=int, default=240, show_default=True)
@click.option("--depth", type=int, default=30, show_default=True)
@click.option("--stride", type=int, default=2, show_default=True)
@click.option(
    "--workers", type=click.IntRange(min=1), default=None, help="Correlation threads"
)
@click.option("--out", "prefix", type=PATH, required=True, help="Output prefix")
@click.option(
    "--curve", is_flag=True, help="Also write the threshold/segment-count curve"
)
@click.pass_context
def baseline(
    ctx: click.Context,
    frame_dir: Path,
    threshold: Optional[float],
    k: Optional[int],
    crop: int,
    depth: int,
    stride: int,
    workers: Optional[int],
    prefix: Path,
    curve: bool,
) -> None:
    """Phase-correlation segmentation of a directory of PGM frames.

    Writes PREFIX.corr.csv (junction_frame,corr) and PREFIX.boundaries.txt.
    """
    if (threshold is None) == (k is None):
        raise click.UsageError("Give exactly one of --threshold or --k")
    settings = _settings(ctx)
    written: List[Path] = []
    with handle_errors(written):
        config = RunConfig(
            subcommand="baseline",
            frame_dir=frame_dir,
            output=prefix,
            pc=PcParams(crop=crop, depth=depth, stride=stride, threshold=threshold),
        )
        pipeline = SuperframePipeline(show_progress=settings.show_progress)
        frames = pipeline.load_frames(frame_dir)
        segmenter = PhaseCorrelationSegmenter(
            config.pc,
            workers=workers or settings.workers,
            show_progress=settings.show_progress,
        )
        result = segmenter.run(frames, k=k)

        corr_path = prefix.with_name(f"{prefix.name}.corr.csv")
        write_rows(
            corr_path,
            ["junction_frame", "corr"],
            [(j, repr(c)) for j, c in zip(result.junctions, result.corrs)],
        )
        written.append(corr_path)
        boundary_path = prefix.with_name(f"{prefix.name}.boundaries.txt")
        write_boundaries(result.boundaries, boundary_path)
        written.append(boundary_path)
        if curve:
            curve_path = prefix.with_name(f"{prefix.name}.curve.csv")
            write_rows(
                curve_path,
                ["threshold", "segments"],
                [(repr(t), n) for t, n in threshold_curve(result.corrs)],
            )
            written.append(curve_path)

    click.echo(f"threshold: {result.threshold:.6g}")
    click.echo(f"boundaries: {len(result.boundaries)}")
    if result.choice is not None and result.choice.saturated:
        click.echo(
            f"Warning: K={k} is not achievable; achieved {result.choice.achieved_k}",
            err=True,
        )


@main.command()
@click.argument("result_file", type=PATH)
@click.argument("truth_file", type=PATH)
@click.option("--n-frames", type=click.IntRange(min=1), required=True)
@click.option("--range-frac", type=float, default=0.008, show_default=True)
@click.option("--beta", type=float, default=0.25, show_default=True)
@click.option("--out", "out_json", type=PATH, default=None, help="Report JSON to write")
@click.option(
    "--csv", "as_csv", is_flag=True, help="Print a one-line CSV row instead of JSON"
)
def evaluate(
    result_file: Path,
    truth_file: Path,
    n_frames: int,
    range_frac: float,
    beta: float,
    out_json: Optional[Path],
    as_csv: bool,
) -> None:
    """Score a boundary file against a ground-truth boundary file."""
    written: List[Path] = []
    with handle_errors(written):
        RunConfig(subcommand="evaluate", range_frac=range_frac, beta_frac=beta)
        result = read_boundaries(result_file, n_frames)
        truth = read_boundaries(truth_file, n_frames)
        report = evaluate_result(result, truth, range_frac, beta)
        if out_json is not None:
            write_json(out_json, report.to_dict())
            written.append(out_json)

    if as_csv:
        click.echo(report.to_csv_row())
    else:
        click.echo(json.dumps(report.to_dict(), indent=2))


@main.command()
@click.option("--features", "features_csv", type=PATH, default=None, help="Feature CSV")
@click.option("--flow-dir", type=PATH, default=None, help="Directory of .flo files")
@click.option(
    "--truth",
    "truth_file",
    type=PATH,
    required=True,
    help="Ground-truth boundaries",
)
@click.option(
    "--k-list", callback=_k_list, required=True, help="Comma-separated K values"
)
@clustering_options
@feature_options
@click.option("--range-frac", type=float, default=0.008, show_default=True)
@click.option("--beta", type=float, default=0.25, show_default=True)
@click.option(
    "--out", "out_csv", type=PATH, required=True, help="Sweep CSV to write"
)
@click.pass_context
def sweep(
    ctx: click.Context,
    features_csv: Optional[Path],
    flow_dir: Optional[Path],
    truth_file: Path,
    k_list: List[int],
    compactness: Optional[float],
    eps: float,
    max_iters: int,
    min_length: Optional[int],
    kind: str,
    motion_gate: float,
    mag_edges: Optional[str],
    range_frac: float,
    beta: float,
    out_csv: Path,
) -> None:
    """Segment and evaluate for every K in a list."""
    _require_one_input(features_csv, flow_dir)
    settings = _settings(ctx)
    written: List[Path] = []
    with handle_errors(written):
        config = RunConfig(
            subcommand="sweep",
            flow_dir=flow_dir,
            features_csv=features_csv,
            output=out_csv,
            feature_kind=kind.lower(),
            features=_feature_params(motion_gate, mag_edges),
            range_frac=range_frac,
            beta_frac=beta,
        )
        pipeline = SuperframePipeline(
            kind=config.feature_kind,
            feature_params=config.features,
            workers=settings.workers,
            show_progress=settings.show_progress,
        )
        rows = pipeline.load_features(features_csv=features_csv, flow_dir=flow_dir)
        _check_table_kind(ctx, features_csv, rows, kind)
        truth = pipeline.read_truth(truth_file, len(rows))
        results = pipeline.sweep(
            rows,
            truth,
            k_list,
            overrides=_superframe_overrides(compactness, eps, max_iters, min_length),
            range_frac=config.range_frac,
            beta_frac=config.beta_frac,
        )
        write_rows(out_csv, SWEEP_HEADER, [r.to_row() for r in results])
        written.append(out_csv)

    for r in results:
        click.echo(
            f"K={r.k} H={r.h} recall={r.recall:.4f} UE={r.under_segmentation:.4f}"
        )


@main.command()
@click.argument("flow_dir", type=PATH)
@click.option(
    "--truth",
    "truth_file",
    type=PATH,
    required=True,
    help="Ground-truth boundaries",
)
@click.option(
    "--k", type=click.IntRange(min=1), required=True, help="Number of clusters K"
)
@click.option(
    "--frames",
    "frame_dir",
    type=PATH,
    default=None,
    help="PGM frames for the baseline",
)
@click.option("--crop", type=int, default=240, show_default=True)
@click.option("--depth", type=int, default=30, show_default=True)
@click.option("--stride", type=int, default=2, show_default=True)
@click.option("--range-frac", type=float, default=0.008, show_default=True)
@click.option("--beta", type=float, default=0.25, show_default=True)
@click.option(
    "--out", "out_csv", type=PATH, required=True, help="Comparison CSV to write"
)
@click.pass_context
def compare(
    ctx: click.Context,
    flow_dir: Path,
    truth_file: Path,
    k: int,
    frame_dir: Optional[Path],
    crop: int,
    depth: int,
    stride: int,
    range_frac: float,
    beta: float,
    out_csv: Path,
) -> None:
    """Compare histogram features, averaged flow and the phase-correlation baseline."""
    settings = _settings(ctx)
    written: List[Path] = []
    rows: List[List[Any]] = []
    with handle_errors(written):
        config = RunConfig(
            subcommand="compare",
            flow_dir=flow_dir,
            output=out_csv,
            pc=PcParams(crop=crop, depth=depth, stride=stride),
            range_frac=range_frac,
            beta_frac=beta,
        )
        loader = SuperframePipeline(show_progress=settings.show_progress)
        fields = loader.load_flow(flow_dir)
        truth = loader.read_truth(truth_file, len(fields))
        params = SuperframeParams(k=k)

        for method in ("histogram", "averaged"):
            pipeline = SuperframePipeline(
                kind=method,
                workers=settings.workers,
                show_progress=settings.show_progress,
            )
            seg = pipeline.segment(pipeline.extract(fields), params)
            report = pipeline.evaluate(seg, truth, config.range_frac, config.beta_frac)
            rows.append(
                [
                    method,
                    k,
                    seg.n_segments,
                    f"{report.recall:.6f}",
                    f"{report.under_segmentation:.6f}",
                ]
            )

        if frame_dir is not None:
            frames = loader.load_frames(frame_dir)
            if len(frames) != len(fields):
                raise FrameCountMismatch(
                    f"{len(frames)} frames but {len(fields)} flow fields"
                )
            result = PhaseCorrelationSegmenter(
                config.pc,
                workers=settings.workers,
                show_progress=settings.show_progress,
            ).run(frames, k=k)
            report = evaluate_result(
                result.boundaries, truth, config.range_frac, config.beta_frac
            )
            rows.append(
                [
                    "phase_correlation",
                    k,
                    len(result.boundaries) + 1,
                    f"{report.recall:.6f}",
                    f"{report.under_segmentation:.6f}",
                ]
            )

        write_rows(out_csv, COMPARE_HEADER, rows)
        written.append(out_csv)

    for row in rows:
        click.echo(f"{row[0]}: H={row[2]} recall={row[3]} UE={row[4]}")


@main.command()
@click.argument("spec_file", type=PATH, required=False)
@click.option(
    "--benchmark", is_flag=True, help="Use the built-in six-segment benchmark"
)
@click.option(
    "--out", "out_dir", type=PATH, required=True, help="Directory to write into"
)
@click.option("--seed", type=int, default=None, help="Override the spec's seed")
def synth(
    spec_file: Optional[Path], benchmark: bool, out_dir: Path, seed: Optional[int]
) -> None:
    """Write a synthetic .flo sequence and its ground-truth boundaries."""
    if (spec_file is None) == (not benchmark):
        raise click.UsageError("Give exactly one of SPEC_FILE or --benchmark")
    written: List[Path] = []
    with handle_errors(written):
        if benchmark:
            spec = benchmark_spec()
        else:
            spec = load_spec(spec_file)  # type: ignore[arg-type]
        if seed is not None:
            spec = spec.model_copy(update={"seed": seed})
        fields, boundaries = generate(spec)
        written.extend(write_sequence(fields, boundaries, out_dir))

    click.echo(f"Wrote {len(fields)} flow files to {out_dir}")
    click.echo(f"Boundaries: {', '.join(str(b) for b in boundaries) or 'none'}")


# Individual command functions for testing
features_command = features
segment_command = segment
baseline_command = baseline
evaluate_command = evaluate
sweep_command = sweep
compare_command = compare
synth_command = synth


if __name__ == "__main__":
    main()
