"""Synthetic detection scenarios with exact ground truth.

Entities move at constant velocity and reflect off the frame borders.
Each emitted detection is the true box plus centered Gaussian noise on all
four fields; each (frame, entity) observation is dropped independently
with the given probability. Output depends only on the arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detections import DetectionSet, clamp_box
from .errors import FormatError
from .model import BoundingBox, Detection, FrameGeometry

SCENARIOS = ("crossing", "bouncing", "group_drift", "enter_exit")


@dataclass(frozen=True)
class TruthEntry:
    frame: int
    entity: int
    bbox: BoundingBox


@dataclass
class GroundTruth:
    entries: tuple[TruthEntry, ...]

    def entity_ids(self):
        return sorted({e.entity for e in self.entries})

    def at(self, frame: int):
        return [e for e in self.entries if e.frame == frame]

    def by_frame(self):
        out: dict[int, list[TruthEntry]] = {}
        for e in self.entries:
            out.setdefault(e.frame, []).append(e)
        return out


@dataclass(frozen=True)
class _Entity:
    enter: int
    exit: int  # exclusive
    x0: float
    y0: float
    vx: float
    vy: float
    w: float
    h: float


def _reflect(value: float, lo: float, hi: float) -> float:
    span = hi - lo
    if span <= 0:
        return lo
    t = (value - lo) % (2 * span)
    return lo + (span - abs(t - span))


def _entity_box(ent: _Entity, frame: int, geom: FrameGeometry) -> BoundingBox:
    t = frame - ent.enter
    cx = _reflect(ent.x0 + ent.vx * t, ent.w / 2, geom.width - ent.w / 2)
    cy = _reflect(ent.y0 + ent.vy * t, ent.h / 2, geom.height - ent.h / 2)
    return BoundingBox(cx, cy, ent.w, ent.h)


def _scenario_entities(scenario, frames, geom, rng) -> list[_Entity]:
    w, h, f = geom.width, geom.height, frames
    if scenario == "crossing":
        bw, bh = 0.035 * w, 0.16 * h
        return [
            _Entity(0, f, 0.15 * w, 0.30 * h, 0.70 * w / f, 0.40 * h / f, bw, bh),
            _Entity(
                0, f, 0.85 * w, 0.70 * h, -0.70 * w / f, -0.40 * h / f,
                1.1 * bw, 1.1 * bh,
            ),
        ]
    if scenario == "bouncing":
        entities = []
        for _ in range(3):
            x = rng.uniform(0.2, 0.8) * w
            y = rng.uniform(0.2, 0.8) * h
            angle = rng.uniform(0, 2 * np.pi)
            speed = rng.uniform(0.002, 0.004) * w
            size = rng.uniform(0.85, 1.15)
            entities.append(
                _Entity(
                    0, f, x, y, speed * np.cos(angle), speed * np.sin(angle),
                    0.03 * w * size, 0.15 * h * size,
                )
            )
        return entities
    if scenario == "group_drift":
        vx, vy = 0.10 * w / f, 0.04 * h / f
        base = (0.35 * w, 0.45 * h)
        offsets = [(-0.06, -0.04), (0.05, -0.02), (-0.02, 0.05), (0.06, 0.04)]
        return [
            _Entity(
                0, f, base[0] + dx * w, base[1] + dy * h, vx, vy,
                0.03 * w, 0.14 * h,
            )
            for dx, dy in offsets
        ]
    if scenario == "enter_exit":
        return [
            _Entity(0, int(0.6 * f), 0.20 * w, 0.25 * h, 0.25 * w / f, 0.0,
                    0.03 * w, 0.14 * h),
            _Entity(int(0.2 * f), f, 0.70 * w, 0.55 * h, -0.20 * w / f, 0.0,
                    0.035 * w, 0.15 * h),
            _Entity(int(0.45 * f), int(0.95 * f), 0.40 * w, 0.80 * h,
                    0.15 * w / f, 0.0, 0.028 * w, 0.13 * h),
        ]
    raise ValueError(f"unknown scenario {scenario!r}, pick one of {SCENARIOS}")


def simulate_scene(
    scenario: str,
    frames: int,
    geometry: FrameGeometry,
    noise_sigma: float = 0.0,
    drop_rate: float = 0.0,
    seed: int = 0,
    stream: int = 0,
) -> tuple[DetectionSet, GroundTruth]:
    if frames <= 0:
        raise ValueError(f"frame count must be positive, got {frames}")
    if not 0 <= drop_rate < 1:
        raise ValueError(f"drop rate must lie in [0, 1), got {drop_rate}")
    rng = np.random.default_rng(seed)
    entities = _scenario_entities(scenario, frames, geometry, rng)

    truth: list[TruthEntry] = []
    by_frame: dict[int, list[Detection]] = {}
    for frame in range(frames):
        for idx, ent in enumerate(entities):
            if not ent.enter <= frame < ent.exit:
                continue
            box = _entity_box(ent, frame, geometry)
            truth.append(TruthEntry(frame, idx, box))
            if drop_rate > 0 and rng.uniform() < drop_rate:
                continue
            if noise_sigma > 0:
                n = rng.normal(0.0, noise_sigma, 4)
                noisy = BoundingBox(
                    box.cx + n[0], box.cy + n[1],
                    max(box.w + n[2], 1.0), max(box.h + n[3], 1.0),
                )
            else:
                noisy = box
            confidence = round(float(rng.uniform(0.5, 1.0)), 4)
            clamped = clamp_box(noisy, geometry)
            if clamped is None:
                continue
            by_frame.setdefault(frame, []).append(
                Detection(frame, 0, confidence, clamped)
            )

    dset = DetectionSet(
        stream=stream,
        geometry=geometry,
        frames={f: tuple(d) for f, d in sorted(by_frame.items())},
    )
    return dset, GroundTruth(tuple(truth))


def format_ground_truth(truth: GroundTruth) -> str:
    lines = [
        f"{e.frame} {e.entity} {e.bbox.cx:.3f} {e.bbox.cy:.3f}"
        f" {e.bbox.w:.3f} {e.bbox.h:.3f}"
        for e in truth.entries
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_ground_truth(text: str, source=None) -> GroundTruth:
    entries = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 6:
            raise FormatError(
                f"expected 6 fields 'frame entity cx cy w h', got {len(parts)}",
                source,
                lineno,
            )
        try:
            frame, entity = int(parts[0]), int(parts[1])
            cx, cy, w, h = (float(p) for p in parts[2:])
            entries.append(TruthEntry(frame, entity, BoundingBox(cx, cy, w, h)))
        except ValueError as exc:
            raise FormatError(str(exc), source, lineno) from exc
    return GroundTruth(tuple(entries))


def load_ground_truth(path) -> GroundTruth:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ground_truth(fh.read(), source=str(path))
