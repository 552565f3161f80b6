"""Core value types: boxes, frame geometry, detections, rendering
instructions, per-stream and director configuration.

All types are immutable values and safe to share between threads. Image
coordinates put the origin at the top left corner with y increasing
downward; "moving up" therefore means decreasing cy. Zoom 1 shows the full
frame and larger values zoom in.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .validation import (
    check_choice,
    check_finite,
    check_fraction,
    check_known_fields,
    check_positive,
)

ZOOM_TYPES = ("full_body", "upper_body")
CAMERA_TYPES = ("pan", "fixed")
SCORING_TYPES = ("zoom", "movement")
ZOOM_SCORE_DIMENSIONS = ("width", "height")


@dataclass(frozen=True, slots=True)
class BoundingBox:
    """Axis-aligned box stored as center plus size, in pixels."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            check_finite(f"bounding box {name}", getattr(self, name))
        if self.w <= 0 or self.h <= 0:
            raise ValueError(
                f"bounding box size must be positive, got {self.w}x{self.h}"
            )

    @property
    def x0(self):
        return self.cx - self.w / 2

    @property
    def x1(self):
        return self.cx + self.w / 2

    @property
    def y0(self):
        return self.cy - self.h / 2

    @property
    def y1(self):
        return self.cy + self.h / 2

    @property
    def area(self):
        return self.w * self.h

    @property
    def aspect(self):
        """Width over height."""
        return self.w / self.h

    @classmethod
    def from_corners(cls, x0, y0, x1, y1):
        return cls((x0 + x1) / 2, (y0 + y1) / 2, x1 - x0, y1 - y0)

    def to_dict(self):
        return {"cx": self.cx, "cy": self.cy, "w": self.w, "h": self.h}

    @classmethod
    def from_dict(cls, data):
        check_known_fields(data, ("cx", "cy", "w", "h"), "bounding box")
        return cls(**data)


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    w = min(a.x1, b.x1) - max(a.x0, b.x0)
    h = min(a.y1, b.y1) - max(a.y0, b.y0)
    if w <= 0 or h <= 0:
        return 0.0
    return w * h


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes, in [0, 1]."""
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union


def enclosing_box(boxes) -> BoundingBox:
    """Minimal axis-aligned box containing every input box."""
    boxes = list(boxes)
    if not boxes:
        raise ValueError("cannot enclose an empty set of boxes")
    return BoundingBox.from_corners(
        min(b.x0 for b in boxes),
        min(b.y0 for b in boxes),
        max(b.x1 for b in boxes),
        max(b.y1 for b in boxes),
    )


@dataclass(frozen=True, slots=True)
class FrameGeometry:
    """Pixel dimensions and frame rate of one video stream."""

    width: int
    height: int
    fps: float

    def __post_init__(self):
        if not (isinstance(self.width, int) and isinstance(self.height, int)):
            raise ValueError("frame dimensions must be integers")
        check_positive("frame width", self.width)
        check_positive("frame height", self.height)
        check_positive("fps", self.fps)

    @property
    def diagonal(self):
        return math.hypot(self.width, self.height)

    @property
    def center(self):
        return (self.width / 2, self.height / 2)

    def frames(self, seconds: float) -> int:
        """Number of frames covering the given duration, at least 1."""
        return max(1, round(seconds * self.fps))

    def to_dict(self):
        return {"width": self.width, "height": self.height, "fps": self.fps}

    @classmethod
    def from_dict(cls, data):
        check_known_fields(data, ("width", "height", "fps"), "frame geometry")
        return cls(**data)


@dataclass(frozen=True, slots=True)
class Detection:
    """One detector observation on one frame."""

    frame: int
    class_id: int
    confidence: float
    bbox: BoundingBox

    def __post_init__(self):
        if self.frame < 0:
            raise ValueError(f"frame index must be >= 0, got {self.frame}")
        check_fraction("confidence", self.confidence, include_zero=True)

    def to_dict(self):
        return {
            "frame": self.frame,
            "class_id": self.class_id,
            "confidence": self.confidence,
            "bbox": self.bbox.to_dict(),
        }

    @classmethod
    def from_dict(cls, data):
        check_known_fields(
            data, ("frame", "class_id", "confidence", "bbox"), "detection"
        )
        data = dict(data)
        data["bbox"] = BoundingBox.from_dict(data["bbox"])
        return cls(**data)


@dataclass(frozen=True, slots=True)
class RenderingInstruction:
    """Per-frame output tuple: stream to show, crop center, zoom factor."""

    frame: int
    stream: int
    cx: float
    cy: float
    zoom: float

    def __post_init__(self):
        check_finite("cx", self.cx)
        check_finite("cy", self.cy)
        check_positive("zoom", self.zoom)

    def to_dict(self):
        return {
            "frame": self.frame,
            "stream": self.stream,
            "cx": self.cx,
            "cy": self.cy,
            "zoom": self.zoom,
        }

    @classmethod
    def from_dict(cls, data):
        check_known_fields(
            data, ("frame", "stream", "cx", "cy", "zoom"), "rendering instruction"
        )
        return cls(**data)


def crop_rect(instr: RenderingInstruction, geom: FrameGeometry):
    """Crop rectangle (x, y, w, h) implied by an instruction.

    The rectangle has size (width/zoom, height/zoom), is centered on
    (cx, cy), and is translated by the smallest amount that puts it fully
    inside the frame. Its aspect ratio always equals the frame's.
    """
    if instr.zoom < 1:
        raise ValueError(
            f"zoom out of range: {instr.zoom!r} would crop outside the frame"
            " (full frame is zoom 1)"
        )
    w = geom.width / instr.zoom
    h = geom.height / instr.zoom
    x = min(max(instr.cx - w / 2, 0.0), geom.width - w)
    y = min(max(instr.cy - h / 2, 0.0), geom.height - h)
    return (x, y, w, h)


@dataclass(frozen=True, slots=True)
class StreamConfig:
    """Per-stream user settings controlling tracking and framing."""

    track_individuals: bool = True
    track_groups: bool = True
    prefer_individual: bool = True
    zoom_type: str = "full_body"
    camera_type: str = "pan"
    zoom_factor: float = 1.0
    fitting: float = 0.1
    scoring_type: str = "movement"
    mask: str | None = None
    confidence_threshold: float = 0.0

    def __post_init__(self):
        if not (self.track_individuals or self.track_groups):
            raise ValueError(
                "at least one of track_individuals / track_groups must be set"
            )
        check_choice("zoom_type", self.zoom_type, ZOOM_TYPES)
        check_choice("camera_type", self.camera_type, CAMERA_TYPES)
        check_choice("scoring_type", self.scoring_type, SCORING_TYPES)
        check_positive("zoom_factor", self.zoom_factor)
        check_fraction("fitting", self.fitting)
        check_fraction(
            "confidence_threshold", self.confidence_threshold, include_zero=True
        )

    def to_dict(self):
        return {
            "track_individuals": self.track_individuals,
            "track_groups": self.track_groups,
            "prefer_individual": self.prefer_individual,
            "zoom_type": self.zoom_type,
            "camera_type": self.camera_type,
            "zoom_factor": self.zoom_factor,
            "fitting": self.fitting,
            "scoring_type": self.scoring_type,
            "mask": self.mask,
            "confidence_threshold": self.confidence_threshold,
        }

    @classmethod
    def from_dict(cls, data):
        check_known_fields(data, tuple(cls().to_dict()), "stream config")
        return cls(**data)


@dataclass(frozen=True)
class DirectorConfig:
    """Director-level settings plus the per-stream configuration."""

    streams: tuple[StreamConfig, ...]
    geometries: tuple[FrameGeometry, ...]
    min_cut_length: float = 2.0
    best_viewpoint_always: bool = True
    objects_of_interest: tuple[int, ...] = ()
    rng_seed: int = 0
    upper_body_zoom: float = 1.25
    zoom_score_dimension: str = "width"

    def __post_init__(self):
        object.__setattr__(self, "streams", tuple(self.streams))
        object.__setattr__(self, "geometries", tuple(self.geometries))
        object.__setattr__(
            self, "objects_of_interest", tuple(self.objects_of_interest)
        )
        if not self.streams:
            raise ValueError("director config needs at least one stream")
        if len(self.streams) != len(self.geometries):
            raise ValueError("streams and geometries must pair up one to one")
        check_positive("min_cut_length", self.min_cut_length)
        check_positive("upper_body_zoom", self.upper_body_zoom)
        check_choice(
            "zoom_score_dimension", self.zoom_score_dimension, ZOOM_SCORE_DIMENSIONS
        )
        fps_values = {g.fps for g in self.geometries}
        if len(fps_values) > 1:
            raise ValueError(
                f"all streams must share one frame rate, got {sorted(fps_values)}"
            )

    @property
    def fps(self):
        return self.geometries[0].fps

    def to_dict(self):
        return {
            "min_cut_length": self.min_cut_length,
            "best_viewpoint_always": self.best_viewpoint_always,
            "objects_of_interest": list(self.objects_of_interest),
            "rng_seed": self.rng_seed,
            "upper_body_zoom": self.upper_body_zoom,
            "zoom_score_dimension": self.zoom_score_dimension,
            "streams": [s.to_dict() for s in self.streams],
            "geometries": [g.to_dict() for g in self.geometries],
        }

    @classmethod
    def from_dict(cls, data):
        allowed = (
            "min_cut_length",
            "best_viewpoint_always",
            "objects_of_interest",
            "rng_seed",
            "upper_body_zoom",
            "zoom_score_dimension",
            "streams",
            "geometries",
        )
        check_known_fields(data, allowed, "director config")
        data = dict(data)
        data["streams"] = tuple(
            StreamConfig.from_dict(s) for s in data.get("streams", ())
        )
        data["geometries"] = tuple(
            FrameGeometry.from_dict(g) for g in data.get("geometries", ())
        )
        if "objects_of_interest" in data:
            data["objects_of_interest"] = tuple(data["objects_of_interest"])
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "DirectorConfig":
        try:
            data = json.loads(text)
            return cls.from_dict(data)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid director config: {exc}") from exc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)
