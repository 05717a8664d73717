"""
Text tables: ground-truth boundaries, feature CSVs, segmentations and reports.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Tuple, Union

from superframes.errors import (
    MalformedRow,
    MissingColumn,
    NegativeHistogramValue,
    NonConsecutiveFrames,
    NotAnInteger,
)
from superframes.flow_io.base import atomic_write
from superframes.models import (
    HOD_BINS,
    HOM_BINS,
    AveragedFlowFeatures,
    BoundarySet,
    FrameFeatures,
    Segmentation,
    label_runs,
)

logger = logging.getLogger(__name__)

HOM_COLUMNS = [f"hom{i}" for i in range(HOM_BINS)]
HOD_COLUMNS = [f"hod{i}" for i in range(HOD_BINS)]
FEATURE_COLUMNS = ["frame"] + HOM_COLUMNS + HOD_COLUMNS
AVERAGED_COLUMNS = ["frame", "u_mean", "v_mean"]

FeatureTable = Union[List[FrameFeatures], List[AveragedFlowFeatures]]


def read_boundaries(path: Path, n_frames: int) -> BoundarySet:
    """Read one boundary frame per line; blank lines and '#' comments are skipped."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")

    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise NotAnInteger(f"{path}: not a UTF-8 text file ({e.reason})") from e

    values: List[int] = []
    for line_number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(int(line))
        except ValueError as e:
            raise NotAnInteger(
                f"{path}:{line_number}: {line!r} is not an integer"
            ) from e
    return BoundarySet.from_unsorted(values, n_frames)


def write_boundaries(boundaries: BoundarySet, path: Path) -> None:
    """Write a boundary set in the format read_boundaries accepts."""
    with atomic_write(path, "w") as handle:
        handle.writelines(f"{b}\n" for b in boundaries)


def _open_table(path: Path) -> Tuple[List[str], List[dict]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    try:
        with open(path, newline="", encoding="utf-8") as handle:
            reader = csv.DictReader(handle)
            header = reader.fieldnames or []
            rows = list(reader)
    except UnicodeDecodeError as e:
        raise MalformedRow(f"{path}: not a UTF-8 text file ({e.reason})") from e
    return list(header), rows


def _number(row: dict, column: str, line_number: int, cast: Any = float) -> Any:
    value = row.get(column)
    if value is None or value == "":
        raise MalformedRow(f"line {line_number}: missing value for {column}")
    try:
        return cast(value)
    except ValueError as e:
        raise MalformedRow(
            f"line {line_number}: {column}={value!r} is not numeric"
        ) from e


def _check_frames(frames: Sequence[int]) -> None:
    for expected, frame in enumerate(frames):
        if frame != expected:
            raise NonConsecutiveFrames(
                f"Expected frame {expected}, found {frame}; frames must be 0..N-1"
            )


def read_feature_csv(path: Path) -> List[FrameFeatures]:
    """Read a `frame,hom0..hom10,hod0..hod7` table."""
    header, rows = _open_table(path)
    missing = [c for c in FEATURE_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing columns {', '.join(missing)}")

    features: List[FrameFeatures] = []
    for line_number, row in enumerate(rows, 2):
        frame = _number(row, "frame", line_number, int)
        hom = [_number(row, c, line_number) for c in HOM_COLUMNS]
        hod = [_number(row, c, line_number) for c in HOD_COLUMNS]
        negative = [c for c, x in zip(HOM_COLUMNS + HOD_COLUMNS, hom + hod) if x < 0]
        if negative:
            raise NegativeHistogramValue(
                f"{path}:{line_number}: negative mass in {', '.join(negative)}"
            )
        outside = [
            c
            for c, x in zip(HOM_COLUMNS + HOD_COLUMNS, hom + hod)
            if not math.isfinite(x) or x > 1.0
        ]
        if outside:
            raise MalformedRow(
                f"{path}:{line_number}: mass outside [0, 1] in {', '.join(outside)}"
            )
        features.append(FrameFeatures(frame=frame, hom=hom, hod=hod))

    _check_frames([f.frame for f in features])
    return features


def write_feature_csv(features: Iterable[FrameFeatures], path: Path) -> None:
    """Write histogram features with round-trippable float formatting."""
    with atomic_write(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(FEATURE_COLUMNS)
        for f in features:
            writer.writerow([f.frame] + [repr(float(x)) for x in f.vector])


def read_averaged_csv(path: Path) -> List[AveragedFlowFeatures]:
    """Read a `frame,u_mean,v_mean` table."""
    header, rows = _open_table(path)
    missing = [c for c in AVERAGED_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(f"{path}: missing columns {', '.join(missing)}")

    features = [
        AveragedFlowFeatures(
            frame=_number(row, "frame", line_number, int),
            u_mean=_number(row, "u_mean", line_number),
            v_mean=_number(row, "v_mean", line_number),
        )
        for line_number, row in enumerate(rows, 2)
    ]
    _check_frames([f.frame for f in features])
    return features


def write_averaged_csv(features: Iterable[AveragedFlowFeatures], path: Path) -> None:
    """Write averaged-flow features."""
    with atomic_write(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(AVERAGED_COLUMNS)
        for f in features:
            writer.writerow([f.frame, repr(float(f.u_mean)), repr(float(f.v_mean))])


def load_feature_table(path: Path) -> FeatureTable:
    """Read either feature table, choosing the parser from the header row."""
    header, _ = _open_table(path)
    if "u_mean" in header:
        return read_averaged_csv(path)
    return read_feature_csv(path)


def sidecar_boundaries_path(path: Path) -> Path:
    """`seg.csv` -> `seg.boundaries.txt`."""
    path = Path(path)
    return path.with_name(f"{path.stem}.boundaries.txt")


def write_segmentation(seg: Segmentation, path: Path) -> Path:
    """Write `frame,label` rows and a sidecar boundary list; return the sidecar path."""
    path = Path(path)
    with atomic_write(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["frame", "label"])
        writer.writerows(enumerate(int(x) for x in seg.labels))

    boundaries = BoundarySet(
        tuple(start for start, _ in label_runs(seg.labels)[1:]), seg.n_frames
    )
    sidecar = sidecar_boundaries_path(path)
    try:
        write_boundaries(boundaries, sidecar)
    except Exception:
        path.unlink(missing_ok=True)
        raise
    logger.info(
        f"Wrote {seg.n_frames} labels to {path} and {len(boundaries)} boundaries"
    )
    return sidecar


def write_rows(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]
) -> None:
    """Write a plain CSV table."""
    with atomic_write(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path: Path, data: Any) -> None:
    """Write indented JSON."""
    with atomic_write(path, "w") as handle:
        json.dump(data, handle, indent=2)
        handle.write("\n")
