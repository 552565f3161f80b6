"""Cross-camera person matching.

Each camera track gets a mean appearance feature computed over
representative frames (frames where the person's box overlaps nobody
else's, preferring boxes whose aspect ratio matches the feature provider's
input). Tracks are clustered into identities with k-means; ambiguous
tracks are flagged uncertain and excluded, and per-identity directing
falls back to the group track where the identity has no coverage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from sklearn.base import BaseEstimator

from .director import (
    Selection,
    SelectionTimeline,
    eligible_tracks,
    select_best,
    select_segmented,
    track_score,
    _track_order,
)
from .errors import DataError, FormatError
from .images import load_ppm
from .model import BoundingBox, DirectorConfig, intersection_area
from .tracking import GROUP, INDIVIDUAL, Trace


class FeatureProvider(Protocol):
    """Seam for appearance feature extraction; deterministic per input."""

    aspect: float  # width / height the extractor expects
    dim: int

    def extract(self, stream: int, frame: int, bbox: BoundingBox) -> np.ndarray:
        ...


def normalize(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    norm = float(np.linalg.norm(vec))
    if not np.isfinite(norm) or norm == 0:
        raise ValueError("feature vector must be finite and nonzero")
    return vec / norm


class SyntheticLabeledProvider:
    """Test provider emitting identity-coded unit vectors plus noise.

    `label_fn(stream, frame, bbox) -> int` supplies the identity; output is
    deterministic for identical inputs.
    """

    def __init__(self, label_fn, dim: int = 16, noise: float = 0.05, seed: int = 0):
        if dim < 2:
            raise ValueError("dim must be >= 2")
        self.label_fn = label_fn
        self.dim = dim
        self.noise = noise
        self.seed = seed
        self.aspect = 0.5

    def extract(self, stream, frame, bbox):
        label = int(self.label_fn(stream, frame, bbox))
        base = np.zeros(self.dim)
        base[label % self.dim] = 1.0
        rng = np.random.default_rng(
            [self.seed, stream, frame, label, int(round(bbox.cx * 16))]
        )
        return normalize(base + rng.normal(0.0, self.noise, self.dim))


class ColorHistogramProvider:
    """RGB histogram over the crop pixels of stored frame images.

    Images are PPM files named `s{stream}_{frame:06d}.ppm` under
    `frames_dir`. 8x8x8 binning, L2 normalized.
    """

    def __init__(self, frames_dir, bins: int = 8):
        self.frames_dir = frames_dir
        self.bins = bins
        self.dim = bins ** 3
        self.aspect = 0.5
        self._cache: dict[tuple[int, int], np.ndarray] = {}

    def _image(self, stream, frame):
        key = (stream, frame)
        if key not in self._cache:
            path = f"{self.frames_dir}/s{stream}_{frame:06d}.ppm"
            self._cache[key] = load_ppm(path)
        return self._cache[key]

    def extract(self, stream, frame, bbox):
        img = self._image(stream, frame)
        h, w = img.shape[:2]
        x0 = max(int(np.floor(bbox.x0)), 0)
        y0 = max(int(np.floor(bbox.y0)), 0)
        x1 = min(int(np.ceil(bbox.x1)), w)
        y1 = min(int(np.ceil(bbox.y1)), h)
        crop = img[y0:y1, x0:x1]
        if crop.size == 0:
            raise DataError(f"empty crop for stream {stream} frame {frame}")
        shift = 8 - int(np.log2(self.bins))
        quantized = (crop.reshape(-1, 3).astype(np.int64) >> shift)
        codes = (
            quantized[:, 0] * self.bins * self.bins
            + quantized[:, 1] * self.bins
            + quantized[:, 2]
        )
        hist = np.bincount(codes, minlength=self.dim).astype(float)
        return normalize(hist)


class TrajectoryStatsProvider:
    """Appearance-free provider using normalized box geometry.

    Useful when no imagery is available: tracks of people occupying
    distinct regions and scales separate cleanly.
    """

    def __init__(self, geometries):
        self.geometries = list(geometries)
        self.dim = 4
        self.aspect = 0.5

    def extract(self, stream, frame, bbox):
        geom = self.geometries[stream]
        return normalize(
            np.array(
                [
                    bbox.cx / geom.width,
                    bbox.cy / geom.height,
                    bbox.w / geom.width,
                    bbox.h / geom.height,
                ]
            )
        )


def representative_frames(
    trace: Trace, stream_traces, provider_aspect: float, count: int = 5
):
    """Pick up to `count` (frame, bbox) pairs to extract features from.

    Returns (entries, isolated). Isolated frames are observed frames whose
    box intersects no other individual trace's box on the stream, ranked by
    aspect-ratio distance to the provider input. Without any isolated
    frame, all observed frames are ranked by (overlap area, aspect
    distance) and `isolated` is False.
    """
    others = [
        t
        for t in stream_traces
        if t.kind == INDIVIDUAL and not (t.id == trace.id and t.stream == trace.stream)
    ]
    candidates = []
    for entry in trace.entries:
        if not entry.observed:
            continue
        overlap = 0.0
        for other in others:
            if other.covers(entry.frame):
                overlap += intersection_area(
                    entry.bbox, other.entry_at(entry.frame).bbox
                )
        aspect_dist = abs(entry.bbox.aspect - provider_aspect)
        candidates.append((entry.frame, entry.bbox, overlap, aspect_dist))
    if not candidates:
        raise DataError("trace has no observed entries to pick frames from")
    isolated = [c for c in candidates if c[2] == 0.0]
    if isolated:
        ranked = sorted(isolated, key=lambda c: (c[3], c[0]))
        return [(f, b) for f, b, _, _ in ranked[:count]], True
    ranked = sorted(candidates, key=lambda c: (c[2], c[3], c[0]))
    return [(f, b) for f, b, _, _ in ranked[:count]], False


def mean_feature(
    trace: Trace, provider: FeatureProvider, stream_traces, count: int = 5
) -> np.ndarray:
    """Normalized mean of the provider outputs over representative frames."""
    frames, _ = representative_frames(trace, stream_traces, provider.aspect, count)
    feats = []
    for frame, bbox in frames:
        try:
            feats.append(normalize(provider.extract(trace.stream, frame, bbox)))
        except Exception:
            continue
    if not feats:
        raise DataError(
            f"feature provider failed on every representative frame of"
            f" track {trace.stream}:{trace.id}"
        )
    return normalize(np.mean(feats, axis=0))


class KMeans(BaseEstimator):
    """Lloyd's algorithm with k-means++ seeding, deterministic per seed.

    The within-cluster sum of squares is checked to be non-increasing on
    every iteration; `objective_history_` keeps the sequence.
    """

    def __init__(self, n_clusters: int = 2, seed: int = 0, max_iter: int = 100):
        self.n_clusters = n_clusters
        self.seed = seed
        self.max_iter = max_iter

    def _init_centroids(self, X, rng):
        n = len(X)
        chosen = [int(rng.integers(n))]
        for _ in range(self.n_clusters - 1):
            d2 = np.min(
                ((X[:, None, :] - X[chosen][None, :, :]) ** 2).sum(axis=2), axis=1
            )
            total = d2.sum()
            if total <= 0:
                remaining = [i for i in range(n) if i not in chosen]
                chosen.append(int(rng.choice(remaining)))
                continue
            chosen.append(int(rng.choice(n, p=d2 / total)))
        return X[chosen].copy()

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError("feature matrix must be 2-dimensional")
        n = len(X)
        if self.n_clusters < 1:
            raise ValueError("n_clusters must be >= 1")
        if self.n_clusters > n:
            raise DataError(
                f"cannot form {self.n_clusters} clusters from {n} points"
            )
        rng = np.random.default_rng(self.seed)
        centroids = self._init_centroids(X, rng)
        labels = self._assign(X, centroids)
        history = [self._objective(X, centroids, labels)]
        n_iter = 0
        for n_iter in range(1, self.max_iter + 1):
            centroids = self._update(X, centroids, labels)
            new_labels = self._assign(X, centroids)
            objective = self._objective(X, centroids, new_labels)
            if objective > history[-1] + 1e-9 * max(1.0, history[-1]):
                raise AssertionError(
                    "k-means objective increased:"
                    f" {history[-1]} -> {objective}"
                )
            history.append(objective)
            if np.array_equal(new_labels, labels):
                labels = new_labels
                break
            labels = new_labels
        self.cluster_centers_ = centroids
        self.labels_ = labels
        self.inertia_ = history[-1]
        self.objective_history_ = history
        self.n_iter_ = n_iter
        return self

    def predict(self, X):
        return self._assign(np.asarray(X, dtype=float), self.cluster_centers_)

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    @staticmethod
    def _dists(X, centroids):
        return ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)

    def _assign(self, X, centroids):
        return np.argmin(self._dists(X, centroids), axis=1)

    def _objective(self, X, centroids, labels):
        return float(((X - centroids[labels]) ** 2).sum())

    def _update(self, X, centroids, labels):
        new = centroids.copy()
        dists = np.sqrt(((X - centroids[labels]) ** 2).sum(axis=1))
        taken: set[int] = set()
        for c in range(self.n_clusters):
            members = labels == c
            if members.any():
                new[c] = X[members].mean(axis=0)
            else:
                order = np.argsort(-dists)
                pick = next(int(i) for i in order if int(i) not in taken)
                taken.add(pick)
                new[c] = X[pick]
        return new


@dataclass
class IdentityClusters:
    """Clustering result keyed by the (stream, track id) handle."""

    k: int
    centroids: np.ndarray
    assignment: dict[tuple[int, int], int]
    uncertainty: dict[tuple[int, int], bool]
    distances: dict[tuple[int, int], float]

    def tracks_of(self, cluster: int, include_uncertain: bool = False):
        return sorted(
            key
            for key, c in self.assignment.items()
            if c == cluster and (include_uncertain or not self.uncertainty[key])
        )


def assign_identities(
    camera_tracks,
    provider: FeatureProvider,
    k: int,
    seed: int = 0,
    uncertainty_margin: float = 0.8,
    rep_count: int = 5,
    traces_by_stream=None,
    features=None,
) -> IdentityClusters:
    """Cluster individual camera tracks into identities.

    A track is uncertain when its nearest-centroid distance exceeds
    uncertainty_margin times the second-nearest distance. Pass `features`
    (mapping (stream, id) -> vector) to skip provider extraction.
    """
    individuals = sorted(
        (t for t in camera_tracks if t.kind == INDIVIDUAL), key=_track_order
    )
    if len(individuals) < k:
        raise DataError(
            f"need at least {k} individual tracks for {k} identities,"
            f" got {len(individuals)}"
        )
    if traces_by_stream is None:
        traces_by_stream = {}
        for t in individuals:
            if t.trace is not None:
                traces_by_stream.setdefault(t.stream, []).append(t.trace)
    rows = []
    for t in individuals:
        if features is not None:
            try:
                rows.append(normalize(features[t.key]))
            except KeyError:
                raise DataError(f"no feature vector for track {t.stream}:{t.target}")
        else:
            rows.append(
                mean_feature(
                    t.trace, provider, traces_by_stream.get(t.stream, ()), rep_count
                )
            )
    X = np.vstack(rows)
    km = KMeans(n_clusters=k, seed=seed).fit(X)
    assignment = {}
    uncertainty = {}
    distances = {}
    for t, row, label in zip(individuals, X, km.labels_):
        d = np.sqrt(((km.cluster_centers_ - row) ** 2).sum(axis=1))
        order = np.sort(d)
        assignment[t.key] = int(label)
        distances[t.key] = float(order[0])
        if k >= 2:
            uncertainty[t.key] = bool(order[0] > uncertainty_margin * order[1])
        else:
            uncertainty[t.key] = False
    return IdentityClusters(
        k=k,
        centroids=km.cluster_centers_,
        assignment=assignment,
        uncertainty=uncertainty,
        distances=distances,
    )


def direct_person(
    cluster: int,
    clusters: IdentityClusters,
    camera_tracks,
    start: int,
    end: int,
    config: DirectorConfig,
    detections=None,
) -> SelectionTimeline:
    """Directing restricted to one identity.

    Frames where the identity has no certain track fall back to the best
    group track when one covers the frame, else to the full-frame view.
    """
    keys = set(clusters.tracks_of(cluster))
    pool = [t for t in camera_tracks if t.kind == INDIVIDUAL and t.key in keys]
    groups = [t for t in camera_tracks if t.kind == GROUP]
    if config.best_viewpoint_always:
        timeline = select_best(pool, start, end, config, detections)
    else:
        timeline = select_segmented(pool, start, end, config, detections)
    cells = list(timeline.cells)
    for i, cell in enumerate(cells):
        if cell.track is not None:
            continue
        frame = start + i
        candidates = eligible_tracks(groups, frame, config, detections)
        if candidates:
            best = max(
                candidates,
                key=lambda t: (track_score(t, frame, config),)
                + tuple(-v for v in _track_order(t)),
            )
            cells[i] = Selection(best, best.stream)
    # Recompute the shown stream for remaining fallback cells.
    last_stream = 0
    for i, cell in enumerate(cells):
        if cell.track is None:
            cells[i] = Selection(None, last_stream)
        else:
            last_stream = cell.track.stream
    return SelectionTimeline(start, cells)


def format_features(features: dict[tuple[int, int], np.ndarray]) -> str:
    lines = []
    for (stream, track), vec in sorted(features.items()):
        vals = " ".join(f"{v:.8f}" for v in np.asarray(vec, dtype=float))
        lines.append(f"{stream}:{track} {len(vec)} {vals}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_features(text: str, source=None) -> dict[tuple[int, int], np.ndarray]:
    """Feature file: one `stream:track dim v1 .. vdim` record per line."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            stream_s, track_s = parts[0].split(":")
            key = (int(stream_s), int(track_s))
            dim = int(parts[1])
            values = np.array([float(p) for p in parts[2:]], dtype=float)
        except (ValueError, IndexError) as exc:
            raise FormatError(f"bad feature record: {exc}", source, lineno) from exc
        if len(values) != dim:
            raise FormatError(
                f"feature length {len(values)} does not match declared {dim}",
                source,
                lineno,
            )
        out[key] = values
    return out


def load_features(path) -> dict[tuple[int, int], np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_features(fh.read(), source=str(path))


def cluster_report_json(clusters: IdentityClusters) -> str:
    tracks = [
        {
            "stream": stream,
            "track": track,
            "cluster": clusters.assignment[(stream, track)],
            "distance": clusters.distances[(stream, track)],
            "uncertain": clusters.uncertainty[(stream, track)],
        }
        for stream, track in sorted(clusters.assignment)
    ]
    return json.dumps(
        {"k": clusters.k, "tracks": tracks}, indent=2, sort_keys=True
    )
