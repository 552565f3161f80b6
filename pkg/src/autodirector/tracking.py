"""Identity tracking: turn per-frame detections into contiguous traces.

One `MultiObjectTracker` instance handles one stream and must see frames
in increasing order. Matching is minimum-cost assignment on (1 - IoU)
between Kalman-predicted boxes and the frame's detections; matches below
the IoU gate are rejected. Matched tracks store the post-correction
filtered box rather than the raw detection, which smooths the boxes and
lets predictions fill detection gaps.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from sklearn.base import BaseEstimator

from .assignment import hungarian
from .errors import FormatError
from .kalman import initial_state, kalman_correct, kalman_predict
from .model import BoundingBox, FrameGeometry, enclosing_box, iou
from .validation import check_fraction

INDIVIDUAL = "individual"
GROUP = "group"


@dataclass(frozen=True, slots=True)
class TraceEntry:
    frame: int
    bbox: BoundingBox
    observed: bool


@dataclass(frozen=True)
class Trace:
    """Contiguous per-frame boxes for one person or one group.

    Gaps are filled by filter predictions with observed=False; the last
    entry is always observed.
    """

    id: int
    stream: int
    kind: str
    entries: tuple[TraceEntry, ...]

    def __post_init__(self):
        if self.kind not in (INDIVIDUAL, GROUP):
            raise ValueError(f"bad trace kind {self.kind!r}")
        if not self.entries:
            raise ValueError("trace must have at least one entry")
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur.frame != prev.frame + 1:
                raise ValueError(
                    f"trace frames must be consecutive, {prev.frame} -> {cur.frame}"
                )
        if not self.entries[-1].observed:
            raise ValueError("trace must end on an observed entry")
        if not any(e.observed for e in self.entries):
            raise ValueError("trace needs at least one observed entry")

    @property
    def start(self) -> int:
        return self.entries[0].frame

    @property
    def end(self) -> int:
        return self.entries[-1].frame

    def __len__(self):
        return len(self.entries)

    def covers(self, frame: int) -> bool:
        return self.start <= frame <= self.end

    def entry_at(self, frame: int) -> TraceEntry:
        if not self.covers(frame):
            raise KeyError(f"frame {frame} outside trace range [{self.start}, {self.end}]")
        return self.entries[frame - self.start]

    def observed_ratio(self) -> float:
        return sum(e.observed for e in self.entries) / len(self.entries)


class _ActiveTrack:
    __slots__ = ("id", "state", "entries", "misses")

    def __init__(self, track_id, state, first_entry):
        self.id = track_id
        self.state = state
        self.entries = [first_entry]
        self.misses = 0


def _strip_and_gate(entries, min_trace_len, min_observed_ratio):
    """Drop the unobserved tail, then apply length and observed-ratio gates."""
    while entries and not entries[-1].observed:
        entries = entries[:-1]
    if len(entries) < max(min_trace_len, 1):
        return None
    observed = sum(e.observed for e in entries)
    if observed / len(entries) < min_observed_ratio:
        return None
    return tuple(entries)


class MultiObjectTracker(BaseEstimator):
    """Per-stream tracker producing finalized `Trace` objects.

    Parameters
    ----------
    iou_gate : minimum IoU for a prediction/detection pair to count as a match
    max_coast : track is closed after this many consecutive unobserved frames
    min_trace_len : shorter traces are discarded at finalization
    min_observed_ratio : traces with a lower observed fraction are discarded
    """

    def __init__(
        self,
        iou_gate: float = 0.3,
        max_coast: int = 30,
        min_trace_len: int = 60,
        min_observed_ratio: float = 0.6,
    ):
        self.iou_gate = iou_gate
        self.max_coast = max_coast
        self.min_trace_len = min_trace_len
        self.min_observed_ratio = min_observed_ratio

    def _check_params(self):
        check_fraction("iou_gate", self.iou_gate)
        if self.iou_gate >= 1:
            raise ValueError("iou_gate must lie strictly below 1")
        if self.max_coast < 1:
            raise ValueError(f"max_coast must be >= 1, got {self.max_coast}")
        check_fraction("min_observed_ratio", self.min_observed_ratio)

    def _reset(self, stream: int):
        self._stream = stream
        self._active: list[_ActiveTrack] = []
        self._closed: list[_ActiveTrack] = []
        self._next_id = 0
        self._last_frame = None

    def step(self, frame: int, detections) -> None:
        """Advance to `frame` and associate its detections.

        Frames must increase; skipped indices are coasted automatically so
        traces stay contiguous.
        """
        if not hasattr(self, "_active"):
            self._check_params()
            self._reset(stream=0)
        if self._last_frame is not None:
            if frame <= self._last_frame:
                raise ValueError(
                    f"frames must increase: got {frame} after {self._last_frame}"
                )
            missing = range(self._last_frame + 1, frame)
        else:
            missing = ()
        for skipped in missing:
            self._advance(skipped, ())
        self._advance(frame, detections)
        self._last_frame = frame

    def _advance(self, frame: int, detections):
        detections = list(detections)
        for det in detections:
            if det.frame != frame:
                raise ValueError(
                    f"detection for frame {det.frame} fed into step({frame})"
                )
        predictions = []
        for track in self._active:
            track.state, predicted = kalman_predict(track.state)
            predictions.append(predicted)

        matched_tracks = set()
        matched_dets = set()
        if self._active and detections:
            ious = [
                [iou(pred, det.bbox) for det in detections] for pred in predictions
            ]
            cost = [[1.0 - v for v in row] for row in ious]
            for ti, dj in hungarian(cost):
                if ious[ti][dj] < self.iou_gate:
                    continue
                track = self._active[ti]
                track.state = kalman_correct(track.state, detections[dj].bbox)
                track.entries.append(TraceEntry(frame, track.state.box(), True))
                track.misses = 0
                matched_tracks.add(ti)
                matched_dets.add(dj)

        survivors = []
        for ti, track in enumerate(self._active):
            if ti in matched_tracks:
                survivors.append(track)
                continue
            track.entries.append(TraceEntry(frame, predictions[ti], False))
            track.misses += 1
            if track.misses > self.max_coast:
                self._closed.append(track)
            else:
                survivors.append(track)
        self._active = survivors

        for dj, det in enumerate(detections):
            if dj in matched_dets:
                continue
            track = _ActiveTrack(
                self._next_id,
                initial_state(det.bbox),
                TraceEntry(frame, det.bbox, True),
            )
            self._next_id += 1
            self._active.append(track)

    def finish(self) -> list[Trace]:
        """Close remaining tracks and return the gated, tail-stripped traces."""
        if not hasattr(self, "_active"):
            return []
        self._closed.extend(self._active)
        self._active = []
        traces = []
        for track in self._closed:
            entries = _strip_and_gate(
                track.entries, self.min_trace_len, self.min_observed_ratio
            )
            if entries is not None:
                traces.append(
                    Trace(track.id, self._stream, INDIVIDUAL, entries)
                )
        traces.sort(key=lambda t: t.id)
        return traces

    def fit(self, X, y=None):
        """Track a whole `DetectionSet`; finalized traces land in `traces_`."""
        self._check_params()
        self._reset(stream=X.stream)
        last = X.max_frame()
        for frame in range(last + 1):
            self.step(frame, X.at(frame))
        self.traces_ = self.finish()
        return self


def merge_group_boxes(
    boxes, geometry: FrameGeometry, outlier_fraction: float = 0.3
) -> BoundingBox | None:
    """Enclosing box of the given boxes after one outlier-rejection pass.

    A box is an outlier when its center is farther than
    outlier_fraction * screen diagonal from the mean center of all boxes.
    """
    boxes = list(boxes)
    if not boxes:
        return None
    mx = sum(b.cx for b in boxes) / len(boxes)
    my = sum(b.cy for b in boxes) / len(boxes)
    radius = outlier_fraction * geometry.diagonal
    kept = [
        b for b in boxes if ((b.cx - mx) ** 2 + (b.cy - my) ** 2) ** 0.5 <= radius
    ]
    if not kept:
        return None
    return enclosing_box(kept)


def track_group(
    traces,
    geometry: FrameGeometry,
    outlier_fraction: float = 0.3,
    max_coast: int = 30,
    min_trace_len: int = 60,
    min_observed_ratio: float = 0.6,
) -> list[Trace]:
    """Build group traces from already-finalized individual traces.

    Per frame the individuals' boxes are merged (outliers dropped) into one
    enclosing box that feeds a dedicated Kalman filter; frames with no
    surviving boxes coast like missing detections. Usually returns a single
    trace; a gap longer than max_coast splits the group track.
    """
    traces = [t for t in traces if t.kind == INDIVIDUAL]
    if not traces:
        return []
    next_id = max(t.id for t in traces) + 1
    start = min(t.start for t in traces)
    end = max(t.end for t in traces)

    groups: list[Trace] = []
    active = None  # _ActiveTrack or None
    for frame in range(start, end + 1):
        boxes = [t.entry_at(frame).bbox for t in traces if t.covers(frame)]
        merged = merge_group_boxes(boxes, geometry, outlier_fraction)
        if active is None:
            if merged is None:
                continue
            active = _ActiveTrack(
                next_id, initial_state(merged), TraceEntry(frame, merged, True)
            )
            next_id += 1
            continue
        active.state, predicted = kalman_predict(active.state)
        if merged is not None:
            active.state = kalman_correct(active.state, merged)
            active.entries.append(TraceEntry(frame, active.state.box(), True))
            active.misses = 0
        else:
            active.entries.append(TraceEntry(frame, predicted, False))
            active.misses += 1
            if active.misses > max_coast:
                groups.append(active)
                active = None
    if active is not None:
        groups.append(active)

    out = []
    for g in groups:
        entries = _strip_and_gate(g.entries, min_trace_len, min_observed_ratio)
        if entries is not None:
            out.append(Trace(g.id, traces[0].stream, GROUP, entries))
    return out


class GroupTracker(BaseEstimator):
    """Estimator wrapper around `track_group` for one stream."""

    def __init__(
        self,
        geometry: FrameGeometry,
        outlier_fraction: float = 0.3,
        max_coast: int = 30,
        min_trace_len: int = 60,
        min_observed_ratio: float = 0.6,
    ):
        self.geometry = geometry
        self.outlier_fraction = outlier_fraction
        self.max_coast = max_coast
        self.min_trace_len = min_trace_len
        self.min_observed_ratio = min_observed_ratio

    def fit(self, X, y=None):
        self.traces_ = track_group(
            X,
            self.geometry,
            self.outlier_fraction,
            self.max_coast,
            self.min_trace_len,
            self.min_observed_ratio,
        )
        return self


def traces_to_json(traces) -> str:
    payload = [
        {
            "id": t.id,
            "stream": t.stream,
            "kind": t.kind,
            "entries": [
                [e.frame, e.bbox.cx, e.bbox.cy, e.bbox.w, e.bbox.h, e.observed]
                for e in t.entries
            ],
        }
        for t in traces
    ]
    return json.dumps(payload, separators=(",", ":"), sort_keys=True)


def traces_from_json(text: str, source=None) -> list[Trace]:
    try:
        payload = json.loads(text)
        traces = []
        for item in payload:
            entries = tuple(
                TraceEntry(int(f), BoundingBox(cx, cy, w, h), bool(obs))
                for f, cx, cy, w, h, obs in item["entries"]
            )
            traces.append(
                Trace(int(item["id"]), int(item["stream"]), item["kind"], entries)
            )
        return traces
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad trace file: {exc}", source) from exc


def load_traces(path) -> list[Trace]:
    with open(path, "r", encoding="utf-8") as fh:
        return traces_from_json(fh.read(), source=str(path))
