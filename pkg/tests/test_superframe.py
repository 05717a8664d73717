"""
Tests for the windowed clustering engine.
"""

import math

import numpy as np
import pytest
from superframes.config import SuperframeParams
from superframes.errors import KTooLarge
from superframes.features import compute_features
from superframes.models import (
    AveragedFlowFeatures,
    BoundarySet,
    ClusterCenter,
    FlowField,
    FrameFeatures,
    Segmentation,
    label_runs,
)
from superframes.superframe import (
    assign_frames,
    boundaries_of,
    distance,
    enforce_contiguity,
    init_centers,
    labels_from_boundaries,
    merge_short_clusters,
    perturb_centers,
    run,
    update_centers,
)


def column(values):
    """One-dimensional features as an (N, 1) array."""
    return np.asarray(values, dtype=np.float64).reshape(-1, 1)


def uniform_features(u, v, frame):
    """Histogram features of a frame where every pixel moves by (u, v)."""
    field = FlowField(width=4, height=4, u=[u] * 16, v=[v] * 16)
    return compute_features(field, frame)


def random_features(rng, n):
    """Random non-negative 19-value features."""
    return [
        FrameFeatures(frame=i, hom=rng.random(11), hod=rng.random(8)) for i in range(n)
    ]


class TestInitCenters:
    """Tests for grid placement of centers."""

    def test_grid_positions(self):
        """Test N=10, K=2 gives S=5 and centers at 3 and 8."""
        centers = init_centers(column(range(10)), 2)

        assert [c.position for c in centers] == [3.0, 8.0]
        assert [c.features[0] for c in centers] == [3.0, 8.0]

    def test_single_center(self):
        """Test K=1 puts the center in the middle."""
        centers = init_centers(column(range(9)), 1)

        assert centers[0].position == 5.0

    def test_k_equals_n(self):
        """Test one center per frame."""
        centers = init_centers(column(range(4)), 4)

        assert [c.position for c in centers] == [0.0, 1.0, 2.0, 3.0]
        assert [c.features[0] for c in centers] == [0.0, 1.0, 2.0, 3.0]

    def test_step_close_to_one_stays_distinct(self):
        """Test N=5, K=4 keeps four distinct in-range centers."""
        centers = init_centers(column(range(5)), 4)

        assert [c.position for c in centers] == [1.0, 2.0, 3.0, 4.0]

    @pytest.mark.parametrize("n", [3, 7, 12, 31])
    def test_positions_strictly_increase(self, n):
        """Test distinct, ordered positions for every K up to N."""
        for k in range(1, n + 1):
            positions = [c.position for c in init_centers(column(range(n)), k)]

            assert all(a < b for a, b in zip(positions, positions[1:]))
            assert 0 <= positions[0] and positions[-1] <= n - 1

    def test_k_too_large(self):
        """Test that K may not exceed N."""
        with pytest.raises(KTooLarge):
            init_centers(column(range(10)), 11)

    def test_k_must_be_positive(self):
        """Test K=0."""
        with pytest.raises(ValueError):
            init_centers(column(range(10)), 0)


class TestPerturbCenters:
    """Tests for moving centers to low-gradient frames."""

    @pytest.fixture
    def features(self):
        """Accelerating features with gradient 3, 5, 7, 9 at frames 1..4."""
        return column([0, 1, 3, 6, 10, 15])

    def test_moves_to_lowest_gradient(self, features):
        """Test each center takes the smallest gradient among p-1, p, p+1."""
        centers = [
            ClusterCenter(features=[0.0], position=2),
            ClusterCenter(features=[0.0], position=4),
        ]

        moved = perturb_centers(centers, features)

        assert [c.position for c in moved] == [1.0, 3.0]
        assert [c.features[0] for c in moved] == [1.0, 6.0]

    def test_end_frames_are_not_eligible(self, features):
        """Test that a center on frame 0 moves inward."""
        moved = perturb_centers([ClusterCenter(features=[0.0], position=0)], features)

        assert moved[0].position == 1.0

    def test_ties_keep_original_position(self):
        """Test that a flat sequence leaves centers in place."""
        centers = init_centers(column([2.0] * 12), 3)

        moved = perturb_centers(centers, column([2.0] * 12))

        assert [c.position for c in moved] == [c.position for c in centers]

    def test_neighbouring_centers_do_not_collide(self):
        """Test that no center moves onto a frame another center holds."""
        centers = init_centers(np.eye(4), 4)

        moved = perturb_centers(centers, np.eye(4))

        assert [c.position for c in moved] == [0.0, 1.0, 2.0, 3.0]

    def test_short_sequences_unchanged(self):
        """Test that two frames have no interior gradient."""
        centers = [ClusterCenter(features=[1.0], position=1)]

        assert perturb_centers(centers, column([0, 1])) == centers


class TestDistance:
    """Tests for the combined feature and temporal distance."""

    def test_identical_features_same_frame(self):
        """Test zero distance."""
        center = ClusterCenter(features=[3.0, 4.0], position=2)
        frame = AveragedFlowFeatures(frame=2, u_mean=3.0, v_mean=4.0)

        assert distance(center, frame, m=1.0, s=1.0) == 0.0

    def test_combination(self):
        """Test sqrt((d_c/m)^2 + (d_s/S)^2)."""
        center = ClusterCenter(features=[0.0, 0.0], position=0)
        frame = AveragedFlowFeatures(frame=2, u_mean=3.0, v_mean=4.0)

        assert distance(center, frame, m=5.0, s=2.0) == pytest.approx(math.sqrt(2.0))

    def test_rejects_non_positive_scales(self):
        """Test m and S must be positive."""
        center = ClusterCenter(features=[0.0, 0.0], position=0)
        frame = AveragedFlowFeatures(frame=0, u_mean=0.0, v_mean=0.0)

        with pytest.raises(ValueError):
            distance(center, frame, m=0.0, s=1.0)


class TestAssignFrames:
    """Tests for windowed nearest-center assignment."""

    def test_matches_brute_force_when_windows_cover_everything(self):
        """Test against exhaustive nearest-center search on random instances."""
        rng = np.random.default_rng(2024)
        for _ in range(50):
            n = int(rng.integers(2, 61))
            k = int(rng.integers(1, min(5, n) + 1))
            features = random_features(rng, n)
            centers = [
                ClusterCenter(features=rng.random(19), position=rng.uniform(0, n - 1))
                for _ in range(k)
            ]
            m = float(rng.uniform(0.1, 2.0))
            s = float(n)

            windowed = assign_frames(centers, features, m, s)
            brute = [
                int(np.argmin([distance(c, f, m, s) for c in centers]))
                for f in features
            ]

            assert windowed.tolist() == brute

    def test_window_excludes_distant_centers(self):
        """Test that a better feature match outside the window is not used."""
        centers = [
            ClusterCenter(features=[0.0], position=0),
            ClusterCenter(features=[10.0], position=9),
        ]
        features = column([0, 0, 10, 0, 0, 0, 0, 10, 10, 10])

        labels = assign_frames(centers, features, m=1.0, s=2.0)

        assert labels[2] == 0

    def test_uncovered_frames_use_global_nearest(self):
        """Test the fallback for frames no window reaches."""
        centers = [
            ClusterCenter(features=[0.0], position=0),
            ClusterCenter(features=[0.0], position=9),
        ]

        labels = assign_frames(centers, column([0.0] * 10), m=1.0, s=2.0)

        assert labels.tolist() == [0, 0, 0, 0, 0, 1, 1, 1, 1, 1]

    def test_ties_go_to_smaller_index(self):
        """Test two identical centers."""
        centers = [ClusterCenter(features=[1.0], position=2)] * 2

        labels = assign_frames(centers, column([1.0] * 5), m=1.0, s=5.0)

        assert labels.tolist() == [0] * 5


class TestUpdateCenters:
    """Tests for mean updates."""

    def test_means_and_l1_error(self):
        """Test member means, the empty-cluster rule and the L1 movement."""
        previous = [
            ClusterCenter(features=[0.0], position=0),
            ClusterCenter(features=[0.0], position=0),
            ClusterCenter(features=[5.0], position=5),
        ]

        centers, error = update_centers(
            np.array([0, 0, 1, 1]), column([0, 2, 4, 8]), previous
        )

        assert centers[0] == ClusterCenter(features=[1.0], position=0.5)
        assert centers[1] == ClusterCenter(features=[6.0], position=2.5)
        assert centers[2] is previous[2]
        assert error == 10.0


class TestEnforceContiguity:
    """Tests for splitting clusters into a single run each."""

    def test_trailing_fragment_joins_neighbour(self):
        """Test [0, 1, 0] becomes [0, 1, 1]."""
        labels = enforce_contiguity(np.array([0, 1, 0]), column([0, 0, 0]))

        assert labels.tolist() == [0, 1, 1]

    def test_random_labels_become_contiguous(self):
        """Test a single run per id on 1000 seeded random label arrays."""
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            n = int(rng.integers(1, 40))
            labels = rng.integers(0, int(rng.integers(1, 8)), size=n)
            features = rng.random((n, 3))

            result = enforce_contiguity(labels, features)

            assert len(label_runs(result)) == len(set(result.tolist()))
            assert set(result.tolist()) <= set(labels.tolist())

    def test_leading_fragment_joins_neighbour(self):
        """Test a displaced run at the start of the video."""
        labels = enforce_contiguity(np.array([1, 0, 0, 0, 1, 1, 1]), column([0] * 7))

        assert labels.tolist() == [0, 0, 0, 0, 1, 1, 1]

    def test_fragment_joins_closer_mean(self):
        """Test a single displaced run between two kept runs."""
        labels = enforce_contiguity(
            np.array([0, 0, 0, 1, 0, 2, 2, 2]), column([0, 0, 0, 5, 8.9, 9, 9, 9])
        )

        assert labels.tolist() == [0, 0, 0, 1, 2, 2, 2, 2]

    def test_equal_distance_favours_left(self):
        """Test the tie rule."""
        labels = enforce_contiguity(
            np.array([0, 0, 0, 1, 0, 2, 2, 2]), column([0, 0, 0, 5, 7, 9, 9, 9])
        )

        assert labels.tolist() == [0, 0, 0, 1, 1, 2, 2, 2]

    def test_gap_of_several_runs_is_split(self):
        """Test that a stretch of displaced runs is divided between its neighbours."""
        labels = enforce_contiguity(
            np.array([0, 0, 0, 1, 2, 1, 2, 3, 3, 3]),
            column([0, 0, 0, 0, 0, 1, 9, 10, 10, 10]),
        )

        assert labels.tolist() == [0, 0, 0, 1, 2, 2, 3, 3, 3, 3]

    def test_contiguous_input_unchanged(self):
        """Test that labels already forming single runs are kept."""
        labels = np.array([2, 2, 0, 0, 1])

        assert enforce_contiguity(labels, column([0] * 5)).tolist() == [2, 2, 0, 0, 1]


class TestMergeShortClusters:
    """Tests for folding short runs into neighbours."""

    def test_merges_into_closer_neighbour(self):
        """Test a one-frame run joining the more similar side."""
        seg = merge_short_clusters(
            np.array([0, 0, 0, 0, 1, 2, 2, 2, 2]),
            column([0, 0, 0, 0, 1, 9, 9, 9, 9]),
            2,
        )

        assert seg.labels.tolist() == [0, 0, 0, 0, 0, 1, 1, 1, 1]

    def test_tie_merges_left(self):
        """Test equal distances."""
        seg = merge_short_clusters(
            np.array([0, 0, 0, 0, 1, 2, 2, 2, 2]),
            column([0, 0, 0, 0, 4.5, 9, 9, 9, 9]),
            2,
        )

        assert seg.labels.tolist() == [0, 0, 0, 0, 0, 1, 1, 1, 1]

    def test_edge_run_merges_inward(self):
        """Test a short first run."""
        seg = merge_short_clusters(np.array([0, 1, 1, 1]), column([0, 5, 5, 5]), 2)

        assert seg.labels.tolist() == [0, 0, 0, 0]

    def test_single_run_survives(self):
        """Test that the only run is never merged away."""
        seg = merge_short_clusters(np.array([0, 0]), column([0, 0]), 5)

        assert seg.labels.tolist() == [0, 0]

    def test_renumbers_left_to_right(self):
        """Test output ids 0..H-1."""
        seg = merge_short_clusters(np.array([5, 5, 2, 2]), column([0, 0, 1, 1]), 1)

        assert seg.labels.tolist() == [0, 0, 1, 1]

    def test_keeps_clustering_state(self):
        """Test centers, iterations and error are carried over."""
        center = ClusterCenter(features=[1.0], position=1)
        seg = Segmentation(
            labels=[0, 1, 1], centers=(center,), iterations=4, final_error=0.5
        )

        merged = merge_short_clusters(seg, column([0, 1, 1]), 2)

        assert merged.centers == (center,)
        assert merged.iterations == 4
        assert merged.final_error == 0.5

    def test_min_length_guarantee(self):
        """Test that every run reaches min_length on random labels."""
        rng = np.random.default_rng(8)
        for _ in range(30):
            n = int(rng.integers(10, 60))
            labels = np.cumsum(rng.random(n) < 0.3)
            min_length = int(rng.integers(2, 6))

            seg = merge_short_clusters(labels, column(rng.random(n)), min_length)
            lengths = [end - start + 1 for start, end in seg.runs()]

            assert sum(lengths) == n
            assert len(lengths) == 1 or min(lengths) >= min_length


class TestRun:
    """Tests for the full clustering loop."""

    def test_constant_features_give_even_runs(self):
        """Test that identical frames split by time alone."""
        seg = run(column([1.0] * 20), SuperframeParams(k=4))

        assert seg.labels.tolist() == [0] * 6 + [1] * 5 + [2] * 5 + [3] * 4
        assert seg.iterations == 2
        assert seg.final_error == 0.0

    def test_two_motion_segments(self):
        """Test that K=2 finds the switch between two motions."""
        features = [uniform_features(1.0, 0.0, i) for i in range(10)] + [
            uniform_features(0.0, -1.0, i) for i in range(10, 20)
        ]

        seg = run(features, SuperframeParams(k=2))

        assert boundaries_of(seg) == BoundarySet((10,), 20)

    def test_single_cluster(self):
        """Test K=1 runs one pass and yields one run."""
        seg = run(column(np.arange(15.0)), SuperframeParams(k=1))

        assert seg.iterations == 1
        assert seg.n_segments == 1
        assert len(boundaries_of(seg)) == 0

    def test_k_equals_n_keeps_every_frame(self):
        """Test that K=N on distinct frames gives one run per frame."""
        seg = run(np.eye(4), SuperframeParams(k=4, min_length=1))

        assert seg.labels.tolist() == [0, 1, 2, 3]
        assert seg.n_segments == 4

    def test_k_too_large(self):
        """Test K greater than N."""
        with pytest.raises(KTooLarge):
            run(column([0.0] * 3), SuperframeParams(k=4))

    def test_max_iters_bounds_loop(self):
        """Test that the iteration count never exceeds max_iters."""
        rng = np.random.default_rng(1)
        features = random_features(rng, 40)

        seg = run(features, SuperframeParams(k=5, max_iters=1, convergence_eps=0.0))

        assert seg.iterations == 1

    def test_deterministic(self):
        """Test that two runs are bit-identical."""
        rng = np.random.default_rng(99)
        features = random_features(rng, 80)
        params = SuperframeParams(k=6)

        assert run(features, params) == run(features, params)

    def test_output_is_contiguous_and_bounded(self):
        """Test single runs per label, ids in order and H <= K."""
        rng = np.random.default_rng(17)
        for _ in range(20):
            n = int(rng.integers(20, 90))
            k = int(rng.integers(2, 9))
            params = SuperframeParams(k=k)

            seg = run(random_features(rng, n), params)
            runs = label_runs(seg.labels)

            first_labels = [int(seg.labels[start]) for start, _ in runs]
            assert first_labels == list(range(len(runs)))
            assert seg.n_segments <= k
            assert 1 <= seg.iterations <= params.max_iters
            lengths = [end - start + 1 for start, end in runs]
            assert len(lengths) == 1 or min(lengths) >= params.resolved_min_length(n)

    def test_debug_log_per_iteration(self, caplog):
        """Test that each iteration is logged at DEBUG."""
        with caplog.at_level("DEBUG", logger="superframes.superframe"):
            run(column([1.0] * 20), SuperframeParams(k=4))

        assert "Iteration 1" in caplog.text
        assert "Iteration 2" in caplog.text


class TestBoundaryConversion:
    """Tests for converting between labels and boundaries."""

    def test_boundaries_of(self):
        """Test run starts after the first."""
        seg = Segmentation(labels=[0, 0, 1, 1, 1, 2])

        assert boundaries_of(seg) == BoundarySet((2, 5), 6)

    def test_labels_from_boundaries(self):
        """Test the reverse direction."""
        labels = labels_from_boundaries(BoundarySet((2, 5), 6))

        assert labels.tolist() == [0, 0, 1, 1, 1, 2]
