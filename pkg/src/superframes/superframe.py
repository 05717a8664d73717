"""
Windowed k-means over frame descriptors, producing contiguous superframes.

The loop places K centers on a regular temporal grid, nudges each to the
lowest-gradient frame nearby, then alternates windowed assignment and mean
updates until the centers stop moving. Label surgery afterwards makes every
cluster a single run and folds away runs that are too short.
"""

import logging
from typing import Any, List, Optional, Sequence, Tuple, Union

import numpy as np

from .config import SuperframeParams, round_half_up
from .errors import KTooLarge
from .features import feature_matrix, gradient_profile
from .models import BoundarySet, ClusterCenter, Segmentation, label_runs

logger = logging.getLogger(__name__)

Features = Union[Sequence[Any], np.ndarray]


def _combine(
    feature_distance: np.ndarray, temporal: np.ndarray, m: float, s: float
) -> np.ndarray:
    return np.sqrt((feature_distance / m) ** 2 + (temporal / s) ** 2)


def _feature_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a - b
    return np.sqrt(np.sum(diff * diff, axis=-1))


def init_centers(features: Features, k: int) -> List[ClusterCenter]:
    """K centers on a regular grid of step S = N / K, at round(S/2 + i*S).

    Center i is clamped to frames i..N-K+i, which keeps positions distinct;
    with K=N every frame gets a center.
    """
    matrix = feature_matrix(features)
    n = matrix.shape[0]
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if k > n:
        raise KTooLarge(f"k={k} exceeds the number of frames ({n})")

    step = n / k
    centers = []
    for i in range(k):
        position = min(max(round_half_up(step / 2 + i * step), i), n - k + i)
        centers.append(ClusterCenter(features=matrix[position], position=position))
    return centers


def perturb_centers(
    centers: Sequence[ClusterCenter], features: Features
) -> List[ClusterCenter]:
    """Move each center to the lowest-gradient frame among p-1, p, p+1.

    Only frames with both neighbours are eligible, and a center never moves
    onto a frame held by another center. Ties keep the original frame, then
    prefer the smaller index. A center with no eligible frame stays put.
    """
    matrix = feature_matrix(features)
    n = matrix.shape[0]
    if n < 3:
        logger.debug(f"Skipping perturbation: {n} frames have no interior gradient")
        return list(centers)

    gradient = gradient_profile(matrix)
    origins = [min(max(round_half_up(c.position), 0), n - 1) for c in centers]
    moved: List[ClusterCenter] = []
    for index, (center, p) in enumerate(zip(centers, origins)):
        taken = {c.position for c in moved} | set(origins[index + 1 :])
        candidates = [
            q
            for q in (p - 1, p, p + 1)
            if 1 <= q <= n - 2 and (q == p or q not in taken)
        ]
        if not candidates:
            moved.append(center)
            continue
        best = min(gradient[q] for q in candidates)
        tied = [q for q in candidates if gradient[q] == best]
        choice = p if p in tied else min(tied)
        moved.append(ClusterCenter(features=matrix[choice], position=choice))
    return moved


def distance(center: ClusterCenter, frame: Any, m: float, s: float) -> float:
    """D_s = sqrt((d_c / m)^2 + (d_s / S)^2) between a center and one frame."""
    if not m > 0 or not s > 0:
        raise ValueError(f"compactness and interval must be positive, got m={m}, S={s}")
    d_c = _feature_distance(center.features, np.asarray(frame.vector, dtype=np.float64))
    d_s = abs(center.position - frame.frame)
    return float(_combine(d_c, np.float64(d_s), m, s))


def _distance_table(
    centers: Sequence[ClusterCenter], matrix: np.ndarray, m: float, s: float
) -> np.ndarray:
    frames = np.arange(matrix.shape[0], dtype=np.float64)
    table = np.empty((len(centers), matrix.shape[0]))
    for k, center in enumerate(centers):
        d_c = _feature_distance(matrix, center.features[np.newaxis, :])
        table[k] = _combine(d_c, np.abs(center.position - frames), m, s)
    return table


def assign_frames(
    centers: Sequence[ClusterCenter], features: Features, m: float, s: float
) -> np.ndarray:
    """Label each frame with its nearest center among those whose window covers it.

    A center's window is [position - S, position + S]. Frames no window
    covers fall back to the globally nearest center. Ties go to the smaller
    center index.
    """
    if not centers:
        raise ValueError("At least one center is required")
    if not m > 0 or not s > 0:
        raise ValueError(f"compactness and interval must be positive, got m={m}, S={s}")

    matrix = feature_matrix(features)
    table = _distance_table(centers, matrix, m, s)
    positions = np.array([c.position for c in centers])
    frames = np.arange(matrix.shape[0], dtype=np.float64)
    covered = np.abs(positions[:, np.newaxis] - frames[np.newaxis, :]) <= s

    labels = np.argmin(np.where(covered, table, np.inf), axis=0)
    orphans = ~covered.any(axis=0)
    if orphans.any():
        labels[orphans] = np.argmin(table[:, orphans], axis=0)
    return labels.astype(np.int64)


def update_centers(
    labels: np.ndarray, features: Features, previous: Sequence[ClusterCenter]
) -> Tuple[List[ClusterCenter], float]:
    """Recompute centers as member means; return them with the L1 movement.

    The position is averaged along with the features. A cluster with no
    members keeps its previous center.
    """
    matrix = feature_matrix(features)
    labels = np.asarray(labels)
    frames = np.arange(matrix.shape[0], dtype=np.float64)

    centers = []
    error = 0.0
    for k, old in enumerate(previous):
        members = labels == k
        if members.any():
            new = ClusterCenter(
                features=matrix[members].mean(axis=0),
                position=float(frames[members].mean()),
            )
        else:
            new = old
        error += float(np.sum(np.abs(new.as_array() - old.as_array())))
        centers.append(new)
    return centers, error


def _run_means(matrix: np.ndarray, runs: Sequence[Tuple[int, int]]) -> List[np.ndarray]:
    return [matrix[start : end + 1].mean(axis=0) for start, end in runs]


def enforce_contiguity(labels: np.ndarray, features: Features) -> np.ndarray:
    """Give every cluster id a single run.

    Each id keeps its longest run (earliest on ties). Displaced runs join a
    neighbouring kept run: a stretch of displaced runs at either end of the
    video joins its only kept neighbour, and a stretch between two kept runs
    is split at a run boundary so that the length-weighted feature distance
    from the displaced run means to the kept run means is smallest, with ties
    favouring the left run.
    """
    matrix = feature_matrix(features)
    labels = np.asarray(labels, dtype=np.int64).copy()
    runs = label_runs(labels)
    run_ids = [int(labels[start]) for start, _ in runs]

    kept: dict = {}
    for index, ((start, end), run_id) in enumerate(zip(runs, run_ids)):
        length = end - start + 1
        best = kept.get(run_id)
        if best is None or length > runs[best][1] - runs[best][0] + 1:
            kept[run_id] = index
    kept_runs = set(kept.values())
    if len(kept_runs) == len(runs):
        return labels

    means = _run_means(matrix, runs)
    index = 0
    while index < len(runs):
        if index in kept_runs:
            index += 1
            continue
        gap_start = index
        while index < len(runs) and index not in kept_runs:
            index += 1
        gap = list(range(gap_start, index))
        left = gap_start - 1 if gap_start > 0 else None
        right = index if index < len(runs) else None

        if left is None or right is None:
            owner = run_ids[right if left is None else left]  # type: ignore[index]
            split_owners = [owner] * len(gap)
        else:
            weights = [runs[g][1] - runs[g][0] + 1 for g in gap]
            to_left = [
                w * _feature_distance(means[g], means[left])
                for g, w in zip(gap, weights)
            ]
            to_right = [
                w * _feature_distance(means[g], means[right])
                for g, w in zip(gap, weights)
            ]
            best_split, best_cost = len(gap), None
            for split in range(len(gap), -1, -1):
                cost = sum(to_left[:split]) + sum(to_right[split:])
                if best_cost is None or cost < best_cost:
                    best_split, best_cost = split, cost
            split_owners = [run_ids[left]] * best_split + [run_ids[right]] * (
                len(gap) - best_split
            )

        for g, owner in zip(gap, split_owners):
            start, end = runs[g]
            labels[start : end + 1] = owner
    return labels


def merge_short_clusters(
    seg: Union[Segmentation, np.ndarray], features: Features, min_length: int
) -> Segmentation:
    """Fold runs shorter than min_length into a temporal neighbour.

    The shortest offending run (earliest on ties) merges into whichever
    neighbouring run has the closer mean feature vector, the left one on
    ties; run means are recomputed after every merge. Labels come back
    renumbered 0..H-1 from left to right.
    """
    if not isinstance(seg, Segmentation):
        seg = Segmentation(labels=seg)
    matrix = feature_matrix(features)
    runs = [list(r) for r in label_runs(seg.labels)]
    means = _run_means(matrix, [tuple(r) for r in runs])  # type: ignore[misc]

    while len(runs) > 1:
        lengths = [end - start + 1 for start, end in runs]
        short = [i for i, length in enumerate(lengths) if length < min_length]
        if not short:
            break
        i = min(short, key=lambda j: (lengths[j], j))

        if i == 0:
            target = 1
        elif i == len(runs) - 1:
            target = i - 1
        else:
            to_left = _feature_distance(means[i], means[i - 1])
            to_right = _feature_distance(means[i], means[i + 1])
            target = i - 1 if to_left <= to_right else i + 1

        lo, hi = min(i, target), max(i, target)
        runs[lo] = [runs[lo][0], runs[hi][1]]
        means[lo] = matrix[runs[lo][0] : runs[lo][1] + 1].mean(axis=0)
        del runs[hi]
        del means[hi]

    labels = np.empty(seg.n_frames, dtype=np.int64)
    for run_index, (start, end) in enumerate(runs):
        labels[start : end + 1] = run_index
    return Segmentation(
        labels=labels,
        centers=seg.centers,
        iterations=seg.iterations,
        final_error=seg.final_error,
    )


def run(features: Features, params: SuperframeParams) -> Segmentation:
    """Full clustering: init, perturb, assign/update to convergence, postprocess."""
    matrix = feature_matrix(features)
    n = matrix.shape[0]
    if params.k > n:
        raise KTooLarge(f"k={params.k} exceeds the number of frames ({n})")

    interval = params.interval(n)
    compactness = params.resolved_compactness()
    centers = perturb_centers(init_centers(matrix, params.k), matrix)

    labels = np.zeros(n, dtype=np.int64)
    error = float("inf")
    iterations = 0
    for iterations in range(1, params.max_iters + 1):
        labels = assign_frames(centers, matrix, compactness, interval)
        centers, error = update_centers(labels, matrix, centers)
        logger.debug(f"Iteration {iterations}: L1 center movement {error:.6g}")
        # K=1 runs a single pass.
        if error <= params.convergence_eps or params.k == 1:
            break
    else:
        logger.info(f"Stopped at max_iters={params.max_iters} with error {error:.6g}")

    clustered = Segmentation(
        labels=enforce_contiguity(labels, matrix),
        centers=tuple(centers),
        iterations=iterations,
        final_error=error,
    )
    result = merge_short_clusters(clustered, matrix, params.resolved_min_length(n))
    logger.info(
        f"Segmented {n} frames into {result.n_segments} superframes "
        f"(K={params.k}, {iterations} iterations)"
    )
    return result


def boundaries_of(seg: Segmentation) -> BoundarySet:
    """First frame of every run except the first."""
    starts = tuple(start for start, _ in seg.runs()[1:])
    return BoundarySet(starts, seg.n_frames)


def labels_from_boundaries(boundaries: BoundarySet) -> np.ndarray:
    """Run ids 0..H-1 for a boundary set."""
    labels = np.zeros(boundaries.n_frames, dtype=np.int64)
    for b in boundaries:
        labels[b:] += 1
    return labels


def segmentation_from_boundaries(
    boundaries: BoundarySet, centers: Optional[Sequence[ClusterCenter]] = None
) -> Segmentation:
    """Wrap a boundary set as a label-only segmentation."""
    return Segmentation(
        labels=labels_from_boundaries(boundaries), centers=tuple(centers or ())
    )
