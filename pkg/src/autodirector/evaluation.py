"""Edit comparison toolkit: cut arrays and the metrics over them.

A cut array is the full editing decision list of one video: the initial
angle at time 0 plus every angle switch, with the video duration. Metrics:
nearest-cut RMSE (directional), same-angle shot overlap, per-angle
F-score from sampled timelines, and clip statistics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import DataError, FormatError

EXPERIENCE_LEVELS = ("none", "some", "a_lot")


@dataclass(frozen=True, slots=True)
class Cut:
    time: float
    angle: int

    def __post_init__(self):
        if not math.isfinite(self.time) or self.time < 0:
            raise ValueError(f"cut time must be finite and >= 0, got {self.time}")


@dataclass(frozen=True)
class CutArray:
    """Strictly increasing cuts starting at time 0, all inside the video."""

    cuts: tuple[Cut, ...]
    duration: float

    def __post_init__(self):
        object.__setattr__(self, "cuts", tuple(self.cuts))
        if not self.cuts:
            raise ValueError("cut array needs at least the initial cut")
        if self.cuts[0].time != 0:
            raise ValueError("first cut must sit at time 0")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be positive, got {self.duration}")
        for prev, cur in zip(self.cuts, self.cuts[1:]):
            if cur.time <= prev.time:
                raise ValueError(
                    f"cut times must strictly increase: {prev.time} -> {cur.time}"
                )
            if cur.angle == prev.angle:
                raise ValueError(
                    f"consecutive cuts must switch angles (angle {cur.angle}"
                    f" at {cur.time})"
                )
        if self.cuts[-1].time >= self.duration:
            raise ValueError("every cut must happen before the video ends")

    def angles(self):
        return sorted({c.angle for c in self.cuts})

    def angle_at(self, t: float) -> int:
        angle = self.cuts[0].angle
        for cut in self.cuts:
            if cut.time <= t:
                angle = cut.angle
            else:
                break
        return angle

    def with_ends(self):
        """(start, end, angle) intervals; the last ends at the duration."""
        out = []
        for i, cut in enumerate(self.cuts):
            end = self.cuts[i + 1].time if i + 1 < len(self.cuts) else self.duration
            out.append((cut.time, end, cut.angle))
        return out

    def to_dict(self):
        return {
            "duration": self.duration,
            "cuts": [{"time": c.time, "angle": c.angle} for c in self.cuts],
        }


def cut_array_to_json(array: CutArray, experience: str | None = None) -> str:
    data = array.to_dict()
    if experience is not None:
        if experience not in EXPERIENCE_LEVELS:
            raise ValueError(f"experience must be one of {EXPERIENCE_LEVELS}")
        data["experience"] = experience
    return json.dumps(data, indent=2, sort_keys=True)


def cut_array_from_json(text: str, source=None) -> CutArray:
    """Parse a cut array document; tolerates the capture tool's optional
    `experience` and `session` fields, rejects anything else."""
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise FormatError(f"invalid JSON: {exc}", source) from exc
    if not isinstance(data, dict):
        raise FormatError("cut array document must be an object", source)
    allowed = {"duration", "cuts", "experience", "session"}
    unknown = set(data) - allowed
    if unknown:
        raise FormatError(f"unknown field(s) {sorted(unknown)}", source)
    if "duration" not in data or "cuts" not in data:
        raise FormatError("cut array needs 'duration' and 'cuts'", source)
    if "experience" in data and data["experience"] not in EXPERIENCE_LEVELS:
        raise FormatError(
            f"experience must be one of {EXPERIENCE_LEVELS},"
            f" got {data['experience']!r}",
            source,
        )
    try:
        cuts = tuple(
            Cut(float(c["time"]), int(c["angle"])) for c in data["cuts"]
        )
        return CutArray(cuts=cuts, duration=float(data["duration"]))
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"bad cut array: {exc}", source) from exc


def load_cut_array(path) -> CutArray:
    with open(path, "r", encoding="utf-8") as fh:
        return cut_array_from_json(fh.read(), source=str(path))


def instructions_to_cuts(instructions, fps: float, duration: float | None = None) -> CutArray:
    """Cut array of an instruction sequence: one cut per stream switch."""
    if not instructions:
        raise DataError("cannot build a cut array from zero instructions")
    ordered = sorted(instructions, key=lambda i: i.frame)
    if duration is None:
        duration = (ordered[-1].frame + 1) / fps
    cuts = [Cut(0.0, ordered[0].stream)]
    for instr in ordered[1:]:
        if instr.stream != cuts[-1].angle:
            cuts.append(Cut(instr.frame / fps, instr.stream))
    return CutArray(cuts=tuple(cuts), duration=duration)


def rmse_cuts(a: CutArray, b: CutArray) -> float:
    """Root mean square of each a-cut's distance to its nearest b-cut.

    Directional: rmse_cuts(a, b) generally differs from rmse_cuts(b, a).
    Angles are ignored when searching for the nearest cut.
    """
    if not b.cuts:
        raise DataError("reference cut array is empty")
    b_times = [c.time for c in b.cuts]
    total = 0.0
    for cut in a.cuts:
        d = min(abs(cut.time - t) for t in b_times)
        total += d * d
    return math.sqrt(total / len(a.cuts))


def _check_durations(a: CutArray, b: CutArray):
    if a.duration != b.duration:
        raise DataError(
            f"cut arrays cover different durations: {a.duration} vs {b.duration}"
        )


def overlap(a: CutArray, b: CutArray, same_angle: bool = True) -> float:
    """Fraction of the video where both edits show the same shot.

    Every pair of cuts with equal angles contributes its (non-negative)
    temporal intersection; the sum is divided by the duration. Set
    same_angle=False for raw temporal overlap regardless of angle.
    """
    _check_durations(a, b)
    total = 0.0
    for start_a, end_a, angle_a in a.with_ends():
        for start_b, end_b, angle_b in b.with_ends():
            if same_angle and angle_a != angle_b:
                continue
            r = min(end_a, end_b) - max(start_a, start_b)
            if r > 0:
                total += r
    return total / a.duration


def overlap_per_angle(a: CutArray, b: CutArray, angle: int) -> float:
    """Same-angle overlap restricted to one angle, over the duration."""
    _check_durations(a, b)
    total = 0.0
    for start_a, end_a, angle_a in a.with_ends():
        if angle_a != angle:
            continue
        for start_b, end_b, angle_b in b.with_ends():
            if angle_b != angle:
                continue
            r = min(end_a, end_b) - max(start_a, start_b)
            if r > 0:
                total += r
    return total / a.duration


def f1_per_angle(a: CutArray, b: CutArray, sample_rate: float = 30.0) -> dict[int, float]:
    """Per-angle F-score of b against a from timelines sampled at sample_rate.

    Per angle g and sample: both show g -> true positive; only b -> false
    positive; only a -> false negative. Angles with an empty precision or
    recall denominator get an F-score of 0.
    """
    _check_durations(a, b)
    if sample_rate <= 0:
        raise ValueError(f"sample rate must be positive, got {sample_rate}")
    n = int(math.floor(a.duration * sample_rate + 1e-9))
    angles = sorted(set(a.angles()) | set(b.angles()))
    tp = {g: 0 for g in angles}
    fp = {g: 0 for g in angles}
    fn = {g: 0 for g in angles}
    for k in range(n):
        t = k / sample_rate
        ga = a.angle_at(t)
        gb = b.angle_at(t)
        if ga == gb:
            tp[ga] += 1
        else:
            fn[ga] += 1
            fp[gb] += 1
    out = {}
    for g in angles:
        if tp[g] + fp[g] == 0 or tp[g] + fn[g] == 0:
            out[g] = 0.0
            continue
        precision = tp[g] / (tp[g] + fp[g])
        recall = tp[g] / (tp[g] + fn[g])
        if precision + recall == 0:
            out[g] = 0.0
        else:
            out[g] = 2 * precision * recall / (precision + recall)
    return out


@dataclass(frozen=True)
class ClipStats:
    mean_clip_length: float
    cut_count: int
    screen_time: dict[int, float]  # angle -> fraction of the duration


def clip_stats(a: CutArray) -> ClipStats:
    """Clip lengths and per-angle screen time; the initial cut is not a switch."""
    intervals = a.with_ends()
    lengths = [end - start for start, end, _ in intervals]
    screen: dict[int, float] = {}
    for (start, end, angle) in intervals:
        screen[angle] = screen.get(angle, 0.0) + (end - start)
    return ClipStats(
        mean_clip_length=sum(lengths) / len(lengths),
        cut_count=len(a.cuts) - 1,
        screen_time={g: t / a.duration for g, t in sorted(screen.items())},
    )


def comparison_report(
    a: CutArray, b: CutArray, sample_rate: float = 30.0, same_angle: bool = True
) -> str:
    """Aligned text table comparing two edits of the same video."""
    stats_a = clip_stats(a)
    stats_b = clip_stats(b)
    angles = sorted(set(a.angles()) | set(b.angles()))
    f1 = f1_per_angle(a, b, sample_rate)
    rows = [("metric", "a", "b")]
    rows.append((
        "clip length (s)",
        f"{stats_a.mean_clip_length:.2f}",
        f"{stats_b.mean_clip_length:.2f}",
    ))
    rows.append(("cut count", str(stats_a.cut_count), str(stats_b.cut_count)))
    for g in angles:
        rows.append((
            f"angle {g} screen time",
            f"{stats_a.screen_time.get(g, 0.0):.4f}",
            f"{stats_b.screen_time.get(g, 0.0):.4f}",
        ))
    rows.append(("overlap all angles", f"{overlap(a, b, same_angle):.4f}", ""))
    for g in angles:
        rows.append((f"overlap angle {g}", f"{overlap_per_angle(a, b, g):.4f}", ""))
    rows.append(("rmse (s)", f"{rmse_cuts(a, b):.6f}", ""))
    for g in angles:
        rows.append((f"f-score angle {g}", f"{f1[g]:.4f}", ""))
    width_metric = max(len(r[0]) for r in rows)
    width_a = max(len(r[1]) for r in rows)
    lines = [
        f"{name:<{width_metric}}  {va:>{width_a}}  {vb}".rstrip()
        for name, va, vb in rows
    ]
    return "\n".join(lines)
