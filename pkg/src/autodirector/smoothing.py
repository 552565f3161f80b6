"""Smooth camera tracks from traces.

Offline: natural cubic splines through keypoints sampled from the trace.
Online: a FIFO delayed smoother that buffers boxes, eases from the last
shown position toward the buffer average, and adds an offset compensating
the buffering delay.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import FormatError
from .model import BoundingBox, FrameGeometry
from .splines import Spline, fit_natural_cubic_spline
from .tracking import Trace
from .validation import check_fraction


def select_keypoints(trace: Trace, fitting: float):
    """Equally spaced (frame, bbox) keypoints, first and last always kept.

    The keypoint count is max(2, round(fitting * len(trace))).
    """
    check_fraction("fitting", fitting)
    n = len(trace)
    if n == 1:
        e = trace.entries[0]
        return [(e.frame, e.bbox)]
    k = min(n, max(2, int(round(fitting * n))))
    spacing = (n - 1) / (k - 1)
    indices = [int(np.ceil(i * spacing)) for i in range(k)]
    indices[-1] = n - 1
    return [(trace.entries[i].frame, trace.entries[i].bbox) for i in indices]


def zoom_of_bbox(box: BoundingBox, geom: FrameGeometry) -> float:
    """Zoom that exactly fits the box on screen, never below full frame."""
    return max(1.0, min(geom.height / box.h, geom.width / box.w))


@dataclass(frozen=True)
class SampledCurve:
    """Per-frame sampled curve with linear interpolation between samples.

    The derivative is a discrete difference over a centered window of
    `derivative_window` frames (clamped at the ends), which is how live
    tracks are scored when no spline is available.
    """

    start: int
    values: np.ndarray
    derivative_window: int = 5

    @property
    def end(self):
        return self.start + len(self.values) - 1

    def value(self, t: float) -> float:
        pos = np.clip(t - self.start, 0, len(self.values) - 1)
        lo = int(np.floor(pos))
        hi = min(lo + 1, len(self.values) - 1)
        frac = pos - lo
        return float(self.values[lo] * (1 - frac) + self.values[hi] * frac)

    def derivative(self, t: float) -> float:
        if len(self.values) < 2:
            return 0.0
        half = self.derivative_window // 2
        center = int(np.clip(round(t - self.start), 0, len(self.values) - 1))
        lo = max(center - half, 0)
        hi = min(center + half, len(self.values) - 1)
        if hi == lo:
            return 0.0
        return float((self.values[hi] - self.values[lo]) / (hi - lo))


@dataclass(frozen=True, eq=False)
class CameraTrack:
    """Smooth framing (x, y, zoom) for one target over its trace range.

    Compared by identity; `key` gives the stable (stream, target) handle.
    """

    stream: int
    target: int
    kind: str
    start: int
    end: int
    x: object  # Spline or SampledCurve
    y: object
    z: object
    trace: Trace | None = None

    def covers(self, frame: int) -> bool:
        return self.start <= frame <= self.end

    def framing_at(self, frame: int):
        """(cx, cy, zoom) at the frame; zoom floored at full frame."""
        return (
            self.x.value(frame),
            self.y.value(frame),
            max(1.0, self.z.value(frame)),
        )

    @property
    def key(self):
        return (self.stream, self.target)


def build_camera_track(trace: Trace, geom: FrameGeometry, fitting: float) -> CameraTrack:
    """Fit x, y and zoom splines through the trace keypoints."""
    keypoints = select_keypoints(trace, fitting)
    if len(keypoints) < 2:
        raise ValueError("camera track needs a trace with at least 2 frames")
    sx = fit_natural_cubic_spline([(f, b.cx) for f, b in keypoints])
    sy = fit_natural_cubic_spline([(f, b.cy) for f, b in keypoints])
    sz = fit_natural_cubic_spline(
        [(f, zoom_of_bbox(b, geom)) for f, b in keypoints]
    )
    return CameraTrack(
        stream=trace.stream,
        target=trace.id,
        kind=trace.kind,
        start=trace.start,
        end=trace.end,
        x=sx,
        y=sy,
        z=sz,
        trace=trace,
    )


class CameraTrackFitter(BaseEstimator, TransformerMixin):
    """Transformer turning finalized traces into spline camera tracks."""

    def __init__(self, geometry: FrameGeometry, fitting: float = 0.1):
        self.geometry = geometry
        self.fitting = fitting

    def fit(self, X, y=None):
        check_fraction("fitting", self.fitting)
        return self

    def transform(self, X) -> list[CameraTrack]:
        check_fraction("fitting", self.fitting)
        return [build_camera_track(t, self.geometry, self.fitting) for t in X]


def smoothstep(u: float) -> float:
    """Ease-in/ease-out profile on [0, 1]."""
    u = min(max(u, 0.0), 1.0)
    return u * u * (3.0 - 2.0 * u)


_FIELDS = ("cx", "cy", "w", "h")


class DelayedSmoother:
    """Online FIFO smoothing of a box stream.

    Boxes are buffered until `capacity` of them arrived. A full buffer is
    collapsed into its average box, a delay-compensation offset
    (gain * mean per-frame displacement * capacity) is added, and
    `capacity` keyframes are emitted easing from the last shown position to
    that target. The buffer is then cleared.
    """

    def __init__(self, capacity: int, compensation_gain: float = 1.0, ease=smoothstep):
        if capacity < 1:
            raise ValueError(f"queue capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.compensation_gain = compensation_gain
        self.ease = ease
        self._queue: list[tuple[int, BoundingBox]] = []
        self._position: BoundingBox | None = None
        self._last_frame: int | None = None

    def push(self, frame: int, box: BoundingBox):
        """Feed one box; returns the emitted keyframes on a flush, else None."""
        if self._last_frame is not None and frame <= self._last_frame:
            raise ValueError(
                f"boxes must arrive in frame order: {frame} after {self._last_frame}"
            )
        self._last_frame = frame
        if self._position is None:
            self._position = box
        self._queue.append((frame, box))
        if len(self._queue) < self.capacity:
            return None
        return self._flush()

    def _flush(self):
        boxes = [b for _, b in self._queue]
        avg = [sum(getattr(b, f) for b in boxes) / len(boxes) for f in _FIELDS]
        if len(boxes) > 1:
            disp = [
                (getattr(boxes[-1], f) - getattr(boxes[0], f)) / (len(boxes) - 1)
                for f in _FIELDS
            ]
        else:
            disp = [0.0] * 4
        target = [
            a + self.compensation_gain * d * self.capacity
            for a, d in zip(avg, disp)
        ]
        origin = [getattr(self._position, f) for f in _FIELDS]
        last_in = self._queue[-1][0]
        keyframes = []
        for j in range(1, self.capacity + 1):
            w = self.ease(j / self.capacity)
            vals = [o + w * (t - o) for o, t in zip(origin, target)]
            keyframes.append(
                (
                    last_in + j,
                    BoundingBox(vals[0], vals[1], max(vals[2], 1.0), max(vals[3], 1.0)),
                )
            )
        self._position = keyframes[-1][1]
        self._queue = []
        return keyframes


def build_online_camera_track(
    trace: Trace,
    geom: FrameGeometry,
    capacity: int | None = None,
    compensation_gain: float = 1.0,
) -> CameraTrack:
    """Camera track from the delayed smoother instead of splines.

    Frames before the first flush hold the first box; frames after the last
    emitted keyframe hold the last one, so the track spans the whole trace.
    """
    if capacity is None:
        capacity = max(1, round(0.5 * geom.fps))
    smoother = DelayedSmoother(capacity, compensation_gain)
    emitted: dict[int, BoundingBox] = {}
    for e in trace.entries:
        batch = smoother.push(e.frame, e.bbox)
        if batch:
            for frame, box in batch:
                emitted[frame] = box

    n = len(trace)
    frames = [trace.start + i for i in range(n)]
    boxes: list[BoundingBox] = []
    current = trace.entries[0].bbox
    for f in frames:
        if f in emitted:
            current = emitted[f]
        boxes.append(current)

    xs = np.array([b.cx for b in boxes])
    ys = np.array([b.cy for b in boxes])
    zs = np.array([zoom_of_bbox(b, geom) for b in boxes])
    return CameraTrack(
        stream=trace.stream,
        target=trace.id,
        kind=trace.kind,
        start=trace.start,
        end=trace.end,
        x=SampledCurve(trace.start, xs),
        y=SampledCurve(trace.start, ys),
        z=SampledCurve(trace.start, zs),
        trace=trace,
    )


def _curve_to_dict(curve):
    if isinstance(curve, Spline):
        return {
            "type": "spline",
            "knots_t": curve.knots_t.tolist(),
            "knots_v": curve.knots_v.tolist(),
            "coeffs": curve.coeffs.tolist(),
        }
    return {
        "type": "sampled",
        "start": curve.start,
        "values": np.asarray(curve.values).tolist(),
    }


def _curve_from_dict(data):
    if data["type"] == "spline":
        return Spline(
            knots_t=np.asarray(data["knots_t"], dtype=float),
            knots_v=np.asarray(data["knots_v"], dtype=float),
            coeffs=np.asarray(data["coeffs"], dtype=float),
        )
    if data["type"] == "sampled":
        return SampledCurve(int(data["start"]), np.asarray(data["values"], dtype=float))
    raise ValueError(f"unknown curve type {data['type']!r}")


def camera_tracks_to_json(tracks) -> str:
    """Serialize tracks (metadata plus curves); the source trace reference
    is not stored, so loaded tracks cannot drive static shots."""
    payload = [
        {
            "stream": t.stream,
            "target": t.target,
            "kind": t.kind,
            "start": t.start,
            "end": t.end,
            "x": _curve_to_dict(t.x),
            "y": _curve_to_dict(t.y),
            "z": _curve_to_dict(t.z),
        }
        for t in tracks
    ]
    return json.dumps(payload, separators=(",", ":"), sort_keys=True)


def camera_tracks_from_json(text: str, source=None) -> list[CameraTrack]:
    try:
        payload = json.loads(text)
        return [
            CameraTrack(
                stream=int(item["stream"]),
                target=int(item["target"]),
                kind=item["kind"],
                start=int(item["start"]),
                end=int(item["end"]),
                x=_curve_from_dict(item["x"]),
                y=_curve_from_dict(item["y"]),
                z=_curve_from_dict(item["z"]),
            )
            for item in payload
        ]
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad camera track file: {exc}", source) from exc
