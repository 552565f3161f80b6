import numpy as np
import pytest

from autodirector.errors import DataError
from autodirector.model import BoundingBox, DirectorConfig, FrameGeometry, StreamConfig
from autodirector.reid import (
    ColorHistogramProvider,
    IdentityClusters,
    KMeans,
    SyntheticLabeledProvider,
    assign_identities,
    cluster_report_json,
    direct_person,
    format_features,
    mean_feature,
    normalize,
    parse_features,
    representative_frames,
)
from autodirector.smoothing import build_camera_track
from autodirector.tracking import Trace, TraceEntry

GEOM = FrameGeometry(1920, 1080, 30.0)


def make_trace(boxes, start=0, trace_id=0, stream=0, kind="individual"):
    entries = tuple(TraceEntry(start + i, b, True) for i, b in enumerate(boxes))
    return Trace(trace_id, stream, kind, entries)


def still_trace(cx, cy, w=60, h=120, frames=80, trace_id=0, stream=0):
    return make_trace(
        [BoundingBox(cx, cy, w, h)] * frames, trace_id=trace_id, stream=stream
    )


class TestRepresentativeFrames:
    def test_single_person_all_frames_qualify(self):
        trace = still_trace(400, 400)
        frames, isolated = representative_frames(trace, [trace], 0.5, count=5)
        assert isolated
        assert len(frames) == 5

    def test_always_overlapping_uses_fallback_ranking(self):
        a = still_trace(400, 400, trace_id=0)
        b = still_trace(410, 400, trace_id=1)  # overlaps a on every frame
        frames, isolated = representative_frames(a, [a, b], 0.5, count=3)
        assert not isolated
        assert len(frames) == 3

    def test_aspect_closest_ranks_first(self):
        boxes = [BoundingBox(400, 400, 50, 100), BoundingBox(400, 400, 60, 100)]
        trace = make_trace(boxes)
        frames, isolated = representative_frames(trace, [trace], 0.5, count=2)
        assert isolated
        assert frames[0][1].w == 50  # |0.5 - 0.5| beats |0.6 - 0.5|

    def test_isolated_frames_really_do_not_overlap(self):
        mover = make_trace(
            [BoundingBox(300 + 10 * i, 400, 60, 120) for i in range(60)], trace_id=0
        )
        still = still_trace(600, 400, trace_id=1, frames=60)
        frames, isolated = representative_frames(mover, [mover, still], 0.5)
        assert isolated
        from autodirector.model import intersection_area

        for f, box in frames:
            assert intersection_area(box, still.entry_at(f).bbox) == 0.0


class TestMeanFeature:
    def test_single_frame_feature(self):
        provider = SyntheticLabeledProvider(lambda s, f, b: 0, dim=8, noise=0.0)
        trace = still_trace(400, 400, frames=5)
        feat = mean_feature(trace, provider, [trace], count=1)
        expected = np.zeros(8)
        expected[0] = 1.0
        assert np.allclose(feat, expected)

    def test_mean_of_identical_features_is_identical(self):
        provider = SyntheticLabeledProvider(lambda s, f, b: 2, dim=8, noise=0.0)
        trace = still_trace(400, 400)
        feat = mean_feature(trace, provider, [trace], count=5)
        expected = np.zeros(8)
        expected[2] = 1.0
        assert np.allclose(feat, expected)

    def test_orthonormal_mean(self):
        class AlternatingProvider:
            aspect = 0.5
            dim = 4

            def extract(self, stream, frame, bbox):
                e = np.zeros(4)
                e[frame % 2] = 1.0
                return e

        trace = still_trace(400, 400, frames=2)
        feat = mean_feature(trace, AlternatingProvider(), [trace], count=2)
        assert np.allclose(feat, np.array([1, 1, 0, 0]) / np.sqrt(2))

    def test_provider_failure_on_all_frames_errors(self):
        class BrokenProvider:
            aspect = 0.5
            dim = 4

            def extract(self, stream, frame, bbox):
                raise RuntimeError("no features today")

        trace = still_trace(400, 400)
        with pytest.raises(DataError, match="failed"):
            mean_feature(trace, BrokenProvider(), [trace])

    def test_normalized_output(self):
        provider = SyntheticLabeledProvider(lambda s, f, b: 1, dim=6, noise=0.2)
        trace = still_trace(500, 300)
        feat = mean_feature(trace, provider, [trace])
        assert abs(np.linalg.norm(feat) - 1.0) < 1e-6


class TestKMeans:
    def test_k_equals_n_zero_objective(self):
        X = np.array([[0.0, 0], [5, 0], [0, 5]])
        km = KMeans(n_clusters=3, seed=1).fit(X)
        assert km.inertia_ == 0.0
        assert sorted(km.labels_) == [0, 1, 2]

    def test_duplicate_points_single_cluster(self):
        X = np.array([[2.0, 3.0]] * 6)
        km = KMeans(n_clusters=1, seed=0).fit(X)
        assert np.allclose(km.cluster_centers_[0], [2, 3])
        assert km.inertia_ == 0.0

    def test_recovers_well_separated_clusters(self):
        rng = np.random.default_rng(0)
        sigma = 0.05
        centers = np.array([[0.0, 0], [1, 0], [0, 1]])  # >= 10 sigma apart
        X = np.vstack(
            [c + rng.normal(0, sigma, (50, 2)) for c in centers]
        )
        labels_true = np.repeat([0, 1, 2], 50)
        km = KMeans(n_clusters=3, seed=5).fit(X)
        # exact partition recovery up to label permutation
        for c in range(3):
            member_labels = km.labels_[labels_true == c]
            assert len(set(member_labels.tolist())) == 1
        assert len(set(km.labels_.tolist())) == 3

    def test_objective_monotone_nonincreasing(self):
        rng = np.random.default_rng(8)
        X = rng.uniform(0, 10, size=(60, 4))
        km = KMeans(n_clusters=4, seed=3).fit(X)
        hist = km.objective_history_
        assert all(b <= a + 1e-9 for a, b in zip(hist, hist[1:]))

    def test_k_larger_than_n_rejected(self):
        with pytest.raises(DataError):
            KMeans(n_clusters=5).fit(np.zeros((3, 2)))

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(2)
        X = rng.uniform(0, 1, size=(40, 3))
        a = KMeans(n_clusters=4, seed=7).fit(X)
        b = KMeans(n_clusters=4, seed=7).fit(X)
        assert np.array_equal(a.labels_, b.labels_)
        assert np.allclose(a.cluster_centers_, b.cluster_centers_)

    def test_predict_matches_fit_labels(self):
        rng = np.random.default_rng(4)
        X = rng.uniform(0, 1, size=(30, 2))
        km = KMeans(n_clusters=3, seed=1).fit(X)
        assert np.array_equal(km.predict(X), km.labels_)


def two_identity_setup(noise=0.02):
    """Two cameras, two people standing in distinct spots on each."""
    traces = {
        0: [still_trace(300, 400, trace_id=0, stream=0),
            still_trace(1500, 400, trace_id=1, stream=0)],
        1: [still_trace(400, 600, trace_id=0, stream=1),
            still_trace(1400, 600, trace_id=1, stream=1)],
    }
    # identity = trace id on both streams
    provider = SyntheticLabeledProvider(
        lambda s, f, b: 0 if b.cx < 960 else 1, dim=8, noise=noise
    )
    tracks = [
        build_camera_track(t, GEOM, 0.1) for ts in traces.values() for t in ts
    ]
    return tracks, provider, traces


class TestAssignIdentities:
    def test_same_identity_clusters_together(self):
        tracks, provider, traces = two_identity_setup()
        clusters = assign_identities(
            tracks, provider, k=2, seed=0, traces_by_stream=traces
        )
        assert clusters.assignment[(0, 0)] == clusters.assignment[(1, 0)]
        assert clusters.assignment[(0, 1)] == clusters.assignment[(1, 1)]
        assert clusters.assignment[(0, 0)] != clusters.assignment[(0, 1)]
        assert not any(clusters.uncertainty.values())

    def test_equidistant_track_flagged_uncertain(self):
        # 50 anchor tracks per identity pin the centroids near e0 and e1;
        # one track sits exactly between them, so its distance ratio is ~1.
        e0 = np.zeros(4); e0[0] = 1
        e1 = np.zeros(4); e1[1] = 1
        mid = normalize(e0 + e1)
        features = {(0, i): e0.copy() for i in range(50)}
        features.update({(0, 50 + i): e1.copy() for i in range(50)})
        features[(0, 100)] = mid
        tracks = [
            build_camera_track(still_trace(300, 400, trace_id=i), GEOM, 0.1)
            for i in range(101)
        ]
        clusters = assign_identities(
            tracks, None, k=2, seed=0, uncertainty_margin=0.9, features=features
        )
        assert clusters.uncertainty[(0, 100)]
        assert not clusters.uncertainty[(0, 0)]
        assert not clusters.uncertainty[(0, 50)]

    def test_identical_features_k1_none_uncertain(self):
        e = np.zeros(4); e[0] = 1
        features = {(0, i): e.copy() for i in range(3)}
        tracks = [
            build_camera_track(still_trace(300, 400, trace_id=i), GEOM, 0.1)
            for i in range(3)
        ]
        clusters = assign_identities(tracks, None, k=1, features=features)
        assert set(clusters.assignment.values()) == {0}
        assert not any(clusters.uncertainty.values())

    def test_fewer_tracks_than_k_rejected(self):
        tracks, provider, traces = two_identity_setup()
        with pytest.raises(DataError):
            assign_identities(tracks, provider, k=9, traces_by_stream=traces)

    def test_permutation_invariant(self):
        tracks, provider, traces = two_identity_setup()
        a = assign_identities(tracks, provider, k=2, seed=3, traces_by_stream=traces)
        b = assign_identities(
            list(reversed(tracks)), provider, k=2, seed=3, traces_by_stream=traces
        )
        assert a.assignment == b.assignment
        assert a.uncertainty == b.uncertainty


class TestDirectPerson:
    def config(self, n_streams=1):
        return DirectorConfig(
            streams=tuple(StreamConfig() for _ in range(n_streams)),
            geometries=tuple(GEOM for _ in range(n_streams)),
        )

    def test_single_candidate_shown_throughout(self):
        trace = still_trace(300, 400, frames=100)
        track = build_camera_track(trace, GEOM, 0.1)
        clusters = IdentityClusters(
            k=1,
            centroids=np.zeros((1, 4)),
            assignment={track.key: 0},
            uncertainty={track.key: False},
            distances={track.key: 0.0},
        )
        timeline = direct_person(0, clusters, [track], 0, 100, self.config())
        assert all(c.track is track for c in timeline.cells)

    def test_cluster_gap_falls_back_to_group(self):
        person = make_trace(
            [BoundingBox(300, 400, 60, 120)] * 100, trace_id=0
        )
        group_trace = make_trace(
            [BoundingBox(900, 500, 1000, 500)] * 300, trace_id=5, kind="group"
        )
        person_track = build_camera_track(person, GEOM, 0.1)
        group_track = build_camera_track(group_trace, GEOM, 0.1)
        clusters = IdentityClusters(
            k=1,
            centroids=np.zeros((1, 4)),
            assignment={person_track.key: 0},
            uncertainty={person_track.key: False},
            distances={person_track.key: 0.0},
        )
        timeline = direct_person(
            0, clusters, [person_track, group_track], 0, 300, self.config()
        )
        for f in range(0, 100):
            assert timeline.track_at(f) is person_track
        for f in range(100, 300):
            assert timeline.track_at(f) is group_track

    def test_no_group_leaves_full_frame_fallback(self):
        person = still_trace(300, 400, frames=100)
        track = build_camera_track(person, GEOM, 0.1)
        clusters = IdentityClusters(
            k=1,
            centroids=np.zeros((1, 4)),
            assignment={track.key: 0},
            uncertainty={track.key: False},
            distances={track.key: 0.0},
        )
        timeline = direct_person(0, clusters, [track], 0, 200, self.config())
        for f in range(100, 200):
            assert timeline.track_at(f) is None

    def test_uncertain_tracks_excluded_from_identity_pool(self):
        person = still_trace(300, 400, frames=100, trace_id=0)
        track = build_camera_track(person, GEOM, 0.1)
        clusters = IdentityClusters(
            k=1,
            centroids=np.zeros((1, 4)),
            assignment={track.key: 0},
            uncertainty={track.key: True},
            distances={track.key: 0.9},
        )
        timeline = direct_person(0, clusters, [track], 0, 100, self.config())
        assert all(c.track is None for c in timeline.cells)


def test_feature_file_round_trip():
    rng = np.random.default_rng(0)
    features = {
        (0, 0): normalize(rng.normal(size=8)),
        (1, 3): normalize(rng.normal(size=8)),
    }
    text = format_features(features)
    again = parse_features(text)
    assert set(again) == set(features)
    for key in features:
        assert np.allclose(again[key], features[key], atol=1e-7)


def test_feature_file_validation():
    from autodirector.errors import FormatError

    with pytest.raises(FormatError):
        parse_features("0:0 3 0.1 0.2\n")  # declared 3, got 2
    with pytest.raises(FormatError):
        parse_features("nonsense\n")


def test_cluster_report_is_json():
    import json

    tracks, provider, traces = two_identity_setup()
    clusters = assign_identities(tracks, provider, k=2, traces_by_stream=traces)
    report = json.loads(cluster_report_json(clusters))
    assert report["k"] == 2
    assert len(report["tracks"]) == 4
    assert {"cluster", "distance", "stream", "track", "uncertain"} == set(
        report["tracks"][0]
    )


def test_histogram_provider_on_synthetic_frames(tmp_path):
    from autodirector.images import save_ppm

    img = np.zeros((40, 80, 3), dtype=np.uint8)
    img[:, :40] = (255, 0, 0)
    img[:, 40:] = (0, 0, 255)
    save_ppm(tmp_path / "s0_000003.ppm", img)
    provider = ColorHistogramProvider(str(tmp_path))
    red = provider.extract(0, 3, BoundingBox(20, 20, 30, 30))
    blue = provider.extract(0, 3, BoundingBox(60, 20, 30, 30))
    assert abs(np.linalg.norm(red) - 1) < 1e-9
    assert np.dot(red, blue) < 1e-9  # disjoint colors, orthogonal histograms
    again = provider.extract(0, 3, BoundingBox(20, 20, 30, 30))
    assert np.array_equal(red, again)
