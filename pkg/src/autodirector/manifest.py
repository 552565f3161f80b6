"""Pipeline manifest: one document wiring streams, configs and outputs.

Schema (JSON):

    {
      "streams": [
        {"detections": "path.txt", "lens": "flat",
         "geometry": {"width":..., "height":..., "fps":...},   # optional
         "config": { ...per-stream settings... }},
        ...
      ],
      "director": {"min_cut_length": 2.0, "best_viewpoint_always": true,
                   "objects_of_interest": [], "rng_seed": 0, ...},
      "tracker": {"iou_gate": 0.3, ...},                        # optional
      "output_dir": "out"                                       # optional
    }

Stream indices are the list positions; detection file headers must agree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .model import DirectorConfig, FrameGeometry, StreamConfig
from .validation import check_choice, check_known_fields

LENS_KINDS = ("flat", "equirect")

_DIRECTOR_FIELDS = (
    "min_cut_length",
    "best_viewpoint_always",
    "objects_of_interest",
    "rng_seed",
    "upper_body_zoom",
    "zoom_score_dimension",
)

_TRACKER_FIELDS = (
    "iou_gate",
    "max_coast",
    "min_trace_len",
    "min_observed_ratio",
    "group_outlier_fraction",
)


@dataclass(frozen=True)
class StreamSpec:
    detections: str
    lens: str = "flat"
    geometry: FrameGeometry | None = None
    config: StreamConfig = field(default_factory=StreamConfig)

    def __post_init__(self):
        check_choice("lens", self.lens, LENS_KINDS)


@dataclass(frozen=True)
class PipelineManifest:
    streams: tuple[StreamSpec, ...]
    director: dict
    tracker: dict
    output_dir: str | None
    base_dir: Path

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p

    def director_config(self, geometries) -> DirectorConfig:
        return DirectorConfig(
            streams=tuple(s.config for s in self.streams),
            geometries=tuple(geometries),
            **self.director,
        )

    def tracker_params(self, fps: float) -> dict:
        """Tracker construction kwargs; time-based defaults follow the fps."""
        params = {
            "iou_gate": 0.3,
            "max_coast": max(1, round(1.0 * fps)),
            "min_trace_len": max(1, round(2.0 * fps)),
            "min_observed_ratio": 0.6,
        }
        params.update(
            {k: v for k, v in self.tracker.items() if k != "group_outlier_fraction"}
        )
        return params

    @property
    def group_outlier_fraction(self) -> float:
        return self.tracker.get("group_outlier_fraction", 0.3)


def parse_manifest(text: str, base_dir: Path | str = ".") -> PipelineManifest:
    try:
        data = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"invalid manifest JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("manifest must be a JSON object")
    try:
        check_known_fields(
            data, ("streams", "director", "tracker", "output_dir"), "manifest"
        )
        raw_streams = data.get("streams")
        if not raw_streams:
            raise ValueError("manifest needs at least one stream")
        streams = []
        for idx, raw in enumerate(raw_streams):
            check_known_fields(
                raw,
                ("detections", "lens", "geometry", "config"),
                f"manifest stream {idx}",
            )
            if "detections" not in raw:
                raise ValueError(f"manifest stream {idx}: missing 'detections'")
            geometry = (
                FrameGeometry.from_dict(raw["geometry"])
                if "geometry" in raw
                else None
            )
            config = (
                StreamConfig.from_dict(raw["config"])
                if "config" in raw
                else StreamConfig()
            )
            streams.append(
                StreamSpec(
                    detections=raw["detections"],
                    lens=raw.get("lens", "flat"),
                    geometry=geometry,
                    config=config,
                )
            )
        director = dict(data.get("director", {}))
        check_known_fields(director, _DIRECTOR_FIELDS, "manifest director")
        if "objects_of_interest" in director:
            director["objects_of_interest"] = tuple(director["objects_of_interest"])
        tracker = dict(data.get("tracker", {}))
        check_known_fields(tracker, _TRACKER_FIELDS, "manifest tracker")
        return PipelineManifest(
            streams=tuple(streams),
            director=director,
            tracker=tracker,
            output_dir=data.get("output_dir"),
            base_dir=Path(base_dir),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid manifest: {exc}") from exc


def load_manifest(path) -> PipelineManifest:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        return parse_manifest(fh.read(), base_dir=path.parent)
