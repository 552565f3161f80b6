"""Automated virtual camera operator and director.

Turns per-frame object detections from multiple streams into smooth
virtual-camera rendering instructions and directed cut sequences, and
provides the metrics for comparing machine edits against human ones.
"""

__version__ = "0.1.0"

from .model import (
    BoundingBox,
    Detection,
    DirectorConfig,
    FrameGeometry,
    RenderingInstruction,
    StreamConfig,
    crop_rect,
    iou,
)
from .tracking import MultiObjectTracker, GroupTracker, Trace, track_group
from .smoothing import (
    CameraTrack,
    CameraTrackFitter,
    DelayedSmoother,
    build_camera_track,
    zoom_of_bbox,
)
from .reid import KMeans, assign_identities
from .evaluation import (
    Cut,
    CutArray,
    clip_stats,
    f1_per_angle,
    instructions_to_cuts,
    overlap,
    overlap_per_angle,
    rmse_cuts,
)

__all__ = [
    "BoundingBox",
    "CameraTrack",
    "CameraTrackFitter",
    "Cut",
    "CutArray",
    "DelayedSmoother",
    "Detection",
    "DirectorConfig",
    "FrameGeometry",
    "GroupTracker",
    "KMeans",
    "MultiObjectTracker",
    "RenderingInstruction",
    "StreamConfig",
    "Trace",
    "assign_identities",
    "build_camera_track",
    "clip_stats",
    "crop_rect",
    "f1_per_angle",
    "instructions_to_cuts",
    "iou",
    "overlap",
    "overlap_per_angle",
    "rmse_cuts",
    "track_group",
    "zoom_of_bbox",
]
