"""Per-frame camera track selection and rendering instruction synthesis.

Selection walks the production range frame by frame. Voluntary switches
(a competitor out-scoring the incumbent) are rate limited by the minimum
cut length; transitions forced by eligibility changes (a track ending, the
pool emptying, a track appearing after a fallback stretch) happen
immediately, since the incumbent cannot be shown any longer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FormatError
from .model import (
    BoundingBox,
    DirectorConfig,
    FrameGeometry,
    RenderingInstruction,
    crop_rect,
    enclosing_box,
    intersection_area,
)
from .smoothing import CameraTrack, zoom_of_bbox
from .tracking import GROUP, INDIVIDUAL

STATIC = "static"
PANNING = "panning"
FALLBACK_FULL_FRAME = "fallback_full_frame"


@dataclass(frozen=True)
class Selection:
    """One timeline cell: the chosen track (None = fallback) and the
    stream shown at that frame."""

    track: CameraTrack | None
    stream: int


@dataclass
class SelectionTimeline:
    start: int
    cells: list[Selection]

    @property
    def end(self):
        return self.start + len(self.cells) - 1

    def __len__(self):
        return len(self.cells)

    def track_at(self, frame: int):
        return self.cells[frame - self.start].track


@dataclass(frozen=True)
class Shot:
    """Maximal run of frames with one selection; [start, end] inclusive."""

    stream: int
    track: CameraTrack | None
    start: int
    end: int
    type: str

    @property
    def frames(self):
        return range(self.start, self.end + 1)


def _track_order(track: CameraTrack):
    return (track.stream, track.target)


def track_score(track: CameraTrack, frame: int, config: DirectorConfig) -> float:
    """Interest score of a track at a frame.

    zoom scoring: screen width times the derivative of the reciprocal zoom
    (positive while zooming out). movement scoring: magnitude of the
    momentary movement vector from the x/y curve derivatives.
    """
    stream_cfg = config.streams[track.stream]
    if stream_cfg.scoring_type == "zoom":
        geom = config.geometries[track.stream]
        span = (
            geom.width
            if config.zoom_score_dimension == "width"
            else geom.height
        )
        z = max(track.z.value(frame), 1e-6)
        dz = track.z.derivative(frame)
        return span * (-dz / (z * z))
    return math.hypot(track.x.derivative(frame), track.y.derivative(frame))


def _framing_rect(track: CameraTrack, frame: int, config: DirectorConfig):
    geom = config.geometries[track.stream]
    cx, cy, zoom = track.framing_at(frame)
    instr = RenderingInstruction(frame, track.stream, cx, cy, zoom)
    x, y, w, h = crop_rect(instr, geom)
    return BoundingBox.from_corners(x, y, x + w, y + h)


def _contains_interest(track, frame, config, detections) -> bool:
    if detections is None:
        return False
    dset = detections[track.stream]
    interest = set(config.objects_of_interest)
    boxes = [d.bbox for d in dset.at(frame) if d.class_id in interest]
    if not boxes:
        return False
    rect = _framing_rect(track, frame, config)
    return any(intersection_area(rect, b) > 0 for b in boxes)


def eligible_tracks(
    tracks, frame: int, config: DirectorConfig, detections=None
) -> list[CameraTrack]:
    """Tracks that may be shown at this frame, in deterministic order.

    With objects of interest configured, the pool narrows to individual
    tracks framing an interest object, then group tracks framing one, and
    if both are empty falls back to every period-eligible track. Without
    interest objects, each stream's prefer_individual flag picks which
    kind wins when both are present.
    """
    pool = sorted(
        (t for t in tracks if t.covers(frame)), key=_track_order
    )
    if not pool:
        return []
    if config.objects_of_interest:
        with_obj = [
            t for t in pool if _contains_interest(t, frame, config, detections)
        ]
        individuals = [t for t in with_obj if t.kind == INDIVIDUAL]
        if individuals:
            return individuals
        groups = [t for t in with_obj if t.kind == GROUP]
        if groups:
            return groups
        return pool
    preferred = [
        t
        for t in pool
        if (
            t.kind == INDIVIDUAL
            if config.streams[t.stream].prefer_individual
            else t.kind == GROUP
        )
    ]
    return preferred or pool


def _best(pool, frame, config):
    """Highest-scoring track; ties resolve to the smallest (stream, id)."""
    return max(pool, key=lambda t: (track_score(t, frame, config),) +
               tuple(-v for v in _track_order(t)))


def select_best(
    tracks, start: int, end: int, config: DirectorConfig, detections=None
) -> SelectionTimeline:
    """Per-frame argmax selection with the minimum-cut hold rule.

    `end` is exclusive. A voluntary switch away from the incumbent is
    suppressed until it has been held for min_cut_length seconds.
    """
    min_hold = max(1, round(config.min_cut_length * config.fps))
    cells: list[Selection] = []
    incumbent: CameraTrack | None = None
    hold_start = start
    last_stream = 0
    for frame in range(start, end):
        pool = eligible_tracks(tracks, frame, config, detections)
        if incumbent is not None and incumbent in pool:
            if frame - hold_start >= min_hold:
                best = _best(pool, frame, config)
                if best is not incumbent:
                    incumbent = best
                    hold_start = frame
        else:
            incumbent = _best(pool, frame, config) if pool else None
            hold_start = frame
        if incumbent is not None:
            last_stream = incumbent.stream
        cells.append(Selection(incumbent, last_stream))
    return SelectionTimeline(start, cells)


def _segment_lengths(total: int, lmin_frames: int, rng) -> list[int]:
    lengths = []
    remaining = total
    while remaining > 0:
        length = int(rng.integers(lmin_frames, 4 * lmin_frames + 1))
        lengths.append(min(length, remaining))
        remaining -= lengths[-1]
    return lengths


def select_segmented(
    tracks,
    start: int,
    end: int,
    config: DirectorConfig,
    detections=None,
    seed: int | None = None,
) -> SelectionTimeline:
    """Segment-wise selection for more varied directing.

    The timeline is split into segments of random length uniform in
    [min_cut, 4*min_cut] seconds (the last one truncated). Each segment
    shows the track with the highest mean score over the frames where it
    is eligible; when that repeats the previous segment's choice and a
    second candidate exists, the second best is taken instead.
    """
    rng = np.random.default_rng(config.rng_seed if seed is None else seed)
    lmin = max(1, round(config.min_cut_length * config.fps))
    cells: list[Selection] = []
    last_stream = 0
    previous: CameraTrack | None = None
    frame = start
    for length in _segment_lengths(end - start, lmin, rng):
        seg_frames = range(frame, frame + length)
        pools = {f: eligible_tracks(tracks, f, config, detections) for f in seg_frames}
        candidates: dict[tuple, CameraTrack] = {}
        scores: dict[tuple, list[float]] = {}
        for f in seg_frames:
            for t in pools[f]:
                candidates[_track_order(t)] = t
                scores.setdefault(_track_order(t), []).append(
                    track_score(t, f, config)
                )
        winner = None
        if candidates:
            ranked = sorted(
                candidates.values(),
                key=lambda t: (
                    -(sum(scores[_track_order(t)]) / len(scores[_track_order(t)])),
                )
                + _track_order(t),
            )
            winner = ranked[0]
            if previous is not None and winner.key == previous.key and len(ranked) > 1:
                winner = ranked[1]
        for f in seg_frames:
            shown = winner if (winner is not None and winner in pools[f]) else None
            if shown is not None:
                last_stream = shown.stream
            cells.append(Selection(shown, last_stream))
        previous = winner
        frame += length
    return SelectionTimeline(start, cells)


def fallback_instruction(
    frame: int, stream: int, geom: FrameGeometry
) -> RenderingInstruction:
    """Full-frame view shown when no camera track is eligible."""
    return RenderingInstruction(
        frame, stream, geom.width / 2, geom.height / 2, 1.0
    )


def segment_shots(timeline: SelectionTimeline, config: DirectorConfig) -> list[Shot]:
    """Run-length encode the timeline into shots tiling it exactly."""
    shots: list[Shot] = []
    if not timeline.cells:
        return shots
    run_start = timeline.start
    current = timeline.cells[0]
    for offset, cell in enumerate(timeline.cells[1:], start=1):
        same = (
            cell.track is current.track
            and (cell.track is not None or cell.stream == current.stream)
        )
        if not same:
            shots.append(_make_shot(current, run_start, timeline.start + offset - 1, config))
            run_start = timeline.start + offset
            current = cell
    shots.append(_make_shot(current, run_start, timeline.end, config))
    return shots


def _make_shot(cell: Selection, start: int, end: int, config: DirectorConfig) -> Shot:
    if cell.track is None:
        return Shot(cell.stream, None, start, end, FALLBACK_FULL_FRAME)
    kind = (
        PANNING
        if config.streams[cell.track.stream].camera_type == "pan"
        else STATIC
    )
    return Shot(cell.track.stream, cell.track, start, end, kind)


def _adjust(frame, stream, cx, cy, zoom, box_h, config: DirectorConfig):
    """Apply face framing, the per-stream zoom factor, and clamping."""
    stream_cfg = config.streams[stream]
    geom = config.geometries[stream]
    if stream_cfg.zoom_type == "upper_body":
        zoom *= config.upper_body_zoom
        cy -= box_h / 4.0
    zoom *= stream_cfg.zoom_factor
    zoom = max(zoom, 1.0)
    w = geom.width / zoom
    h = geom.height / zoom
    cx = min(max(cx, w / 2), geom.width - w / 2)
    cy = min(max(cy, h / 2), geom.height - h / 2)
    return RenderingInstruction(frame, stream, cx, cy, zoom)


def shot_instructions(shot: Shot, config: DirectorConfig) -> list[RenderingInstruction]:
    """Per-frame instructions for one shot.

    Panning shots evaluate the track curves each frame. Static shots frame
    the enclosing box of every trace box in the interval once. Fallback
    shots show the full frame.
    """
    geom = config.geometries[shot.stream]
    if shot.type == FALLBACK_FULL_FRAME:
        return [fallback_instruction(f, shot.stream, geom) for f in shot.frames]
    track = shot.track
    if shot.type == STATIC:
        if track.trace is None:
            raise ValueError(
                "static shot needs the camera track's source trace boxes"
            )
        boxes = [
            track.trace.entry_at(f).bbox
            for f in shot.frames
            if track.trace.covers(f)
        ]
        merged = enclosing_box(boxes)
        instr = _adjust(
            shot.start,
            shot.stream,
            merged.cx,
            merged.cy,
            zoom_of_bbox(merged, geom),
            merged.h,
            config,
        )
        return [
            RenderingInstruction(f, instr.stream, instr.cx, instr.cy, instr.zoom)
            for f in shot.frames
        ]
    out = []
    for f in shot.frames:
        cx, cy, zoom = track.framing_at(f)
        out.append(_adjust(f, shot.stream, cx, cy, zoom, geom.height / zoom, config))
    return out


def render_timeline(
    timeline: SelectionTimeline, config: DirectorConfig
) -> list[RenderingInstruction]:
    """One instruction per frame of the timeline, in frame order."""
    instructions: list[RenderingInstruction] = []
    for shot in segment_shots(timeline, config):
        instructions.extend(shot_instructions(shot, config))
    assert len(instructions) == len(timeline.cells)
    assert all(
        instr.frame == timeline.start + i for i, instr in enumerate(instructions)
    )
    return instructions


def select_timeline(
    tracks, start: int, end: int, config: DirectorConfig, detections=None
) -> SelectionTimeline:
    """Dispatch on the configured selection mode."""
    if config.best_viewpoint_always:
        return select_best(tracks, start, end, config, detections)
    return select_segmented(tracks, start, end, config, detections)


def format_instructions(instructions) -> str:
    lines = [
        f"{i.frame} {i.stream} {i.cx:.6f} {i.cy:.6f} {i.zoom:.6f}"
        for i in instructions
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_instructions(text: str, source=None) -> list[RenderingInstruction]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 5:
            raise FormatError(
                f"expected 5 fields 'frame stream cx cy zoom', got {len(parts)}",
                source,
                lineno,
            )
        try:
            out.append(
                RenderingInstruction(
                    int(parts[0]),
                    int(parts[1]),
                    float(parts[2]),
                    float(parts[3]),
                    float(parts[4]),
                )
            )
        except ValueError as exc:
            raise FormatError(str(exc), source, lineno) from exc
    return out


def load_instructions(path) -> list[RenderingInstruction]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instructions(fh.read(), source=str(path))
