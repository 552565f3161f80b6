"""Detection ingest: the per-stream detection text format and binary
region-of-interest masks.

File format, one file per stream:

    autodirector-detections v1 <stream> <width> <height> <fps>
    <frame> <class> <confidence> <cx> <cy> <w> <h>
    ...

Boxes are clamped to the frame bounds on ingest; boxes entirely outside
the frame are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, FormatError
from .images import load_pgm, read_pgm
from .model import BoundingBox, Detection, FrameGeometry

HEADER_MAGIC = "autodirector-detections"
FORMAT_VERSION = "v1"


@dataclass
class DetectionSet:
    """All detections of one stream, grouped by frame index."""

    stream: int
    geometry: FrameGeometry
    frames: dict[int, tuple[Detection, ...]]

    def max_frame(self) -> int:
        """Largest frame index present, -1 when empty."""
        return max(self.frames, default=-1)

    def at(self, frame: int) -> tuple[Detection, ...]:
        return self.frames.get(frame, ())

    def all_detections(self):
        for frame in sorted(self.frames):
            yield from self.frames[frame]

    def count(self) -> int:
        return sum(len(v) for v in self.frames.values())


def clamp_box(box: BoundingBox, geometry: FrameGeometry) -> BoundingBox | None:
    """Intersect a box with the frame; None when nothing remains.

    Boxes already inside the frame come back unchanged (bit-exact).
    """
    if (
        box.x0 >= 0
        and box.y0 >= 0
        and box.x1 <= geometry.width
        and box.y1 <= geometry.height
    ):
        return box
    x0 = max(box.x0, 0.0)
    y0 = max(box.y0, 0.0)
    x1 = min(box.x1, float(geometry.width))
    y1 = min(box.y1, float(geometry.height))
    if x1 <= x0 or y1 <= y0:
        return None
    return BoundingBox.from_corners(x0, y0, x1, y1)


def parse_detections(
    data, geometry: FrameGeometry | None = None, source=None
) -> DetectionSet:
    """Parse a detection file body; `geometry` overrides must match the header."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines()
    if not lines or not lines[0].strip():
        raise FormatError("missing header line", source, 1)
    head = lines[0].split()
    if len(head) != 6 or head[0] != HEADER_MAGIC:
        raise FormatError(f"not a {HEADER_MAGIC} file", source, 1)
    if head[1] != FORMAT_VERSION:
        raise FormatError(f"unknown version {head[1]!r}", source, 1)
    try:
        stream = int(head[2])
        header_geom = FrameGeometry(int(head[3]), int(head[4]), float(head[5]))
    except ValueError as exc:
        raise FormatError(f"bad header: {exc}", source, 1) from exc
    if geometry is not None and geometry != header_geom:
        raise FormatError(
            f"geometry mismatch: header says {header_geom}, expected {geometry}",
            source,
            1,
        )
    geom = header_geom

    by_frame: dict[int, list[Detection]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 7:
            raise FormatError(
                f"expected 7 fields 'frame class confidence cx cy w h', got {len(parts)}",
                source,
                lineno,
            )
        try:
            frame = int(parts[0])
            class_id = int(parts[1])
            confidence = float(parts[2])
            cx, cy, w, h = (float(p) for p in parts[3:])
        except ValueError as exc:
            raise FormatError(f"non-numeric field: {exc}", source, lineno) from exc
        if w <= 0 or h <= 0:
            raise FormatError(f"non-positive box size {w}x{h}", source, lineno)
        try:
            box = BoundingBox(cx, cy, w, h)
            box = clamp_box(box, geom)
            if box is None:
                continue
            det = Detection(frame, class_id, confidence, box)
        except ValueError as exc:
            raise FormatError(str(exc), source, lineno) from exc
        by_frame.setdefault(frame, []).append(det)

    frames = {f: tuple(dets) for f, dets in sorted(by_frame.items())}
    return DetectionSet(stream=stream, geometry=geom, frames=frames)


def load_detections(path, geometry: FrameGeometry | None = None) -> DetectionSet:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_detections(fh.read(), geometry, source=str(path))


def format_detections(dset: DetectionSet) -> str:
    g = dset.geometry
    fps = int(g.fps) if float(g.fps).is_integer() else g.fps
    out = [f"{HEADER_MAGIC} {FORMAT_VERSION} {dset.stream} {g.width} {g.height} {fps}"]
    for det in dset.all_detections():
        b = det.bbox
        out.append(
            f"{det.frame} {det.class_id} {det.confidence:.4f}"
            f" {b.cx:.3f} {b.cy:.3f} {b.w:.3f} {b.h:.3f}"
        )
    return "\n".join(out) + "\n"


def filter_confidence(dset: DetectionSet, threshold: float) -> DetectionSet:
    """Keep detections with confidence >= threshold."""
    frames = {}
    for f, dets in dset.frames.items():
        kept = tuple(d for d in dets if d.confidence >= threshold)
        if kept:
            frames[f] = kept
    return DetectionSet(dset.stream, dset.geometry, frames)


@dataclass
class BinaryMask:
    """Per-pixel region of interest; True marks pixels to keep."""

    width: int
    height: int
    bits: np.ndarray  # bool, shape (height, width)

    @classmethod
    def from_array(cls, bits: np.ndarray) -> "BinaryMask":
        bits = np.asarray(bits, dtype=bool)
        h, w = bits.shape
        return cls(width=w, height=h, bits=bits)

    @classmethod
    def from_pgm_bytes(cls, data: bytes, source=None) -> "BinaryMask":
        return cls.from_array(read_pgm(data, source) > 127)

    @classmethod
    def load(cls, path) -> "BinaryMask":
        return cls.from_array(load_pgm(path) > 127)


def apply_mask(dset: DetectionSet, mask: BinaryMask) -> DetectionSet:
    """Keep detections whose box covers at least one True mask pixel."""
    g = dset.geometry
    if (mask.width, mask.height) != (g.width, g.height):
        raise DataError(
            f"mask size {mask.width}x{mask.height} does not match"
            f" frame size {g.width}x{g.height}"
        )
    frames = {}
    for f, dets in dset.frames.items():
        kept = tuple(d for d in dets if _covers_mask(d.bbox, mask))
        if kept:
            frames[f] = kept
    return DetectionSet(dset.stream, dset.geometry, frames)


def _covers_mask(box: BoundingBox, mask: BinaryMask) -> bool:
    x0 = max(int(np.floor(box.x0)), 0)
    y0 = max(int(np.floor(box.y0)), 0)
    x1 = min(int(np.ceil(box.x1)), mask.width)
    y1 = min(int(np.ceil(box.y1)), mask.height)
    if x1 <= x0 or y1 <= y0:
        return False
    return bool(mask.bits[y0:y1, x0:x1].any())
