"""Command line entry point.

Subcommands: simulate, track, direct, reid, project, evaluate. Exit codes:
0 success, 1 usage error, 2 data error (with a machine-readable
`error: data: ...` line on stderr). Outputs are written atomically and are
byte-identical across runs with identical inputs and seeds.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import tempfile
from pathlib import Path

from . import __version__
from .detections import (
    BinaryMask,
    apply_mask,
    filter_confidence,
    format_detections,
    load_detections,
)
from .director import (
    format_instructions,
    load_instructions,
    render_timeline,
    select_timeline,
)
from .errors import DataError
from .evaluation import (
    comparison_report,
    cut_array_to_json,
    instructions_to_cuts,
    load_cut_array,
)
from .images import load_ppm, write_ppm
from .manifest import load_manifest
from .model import FrameGeometry, RenderingInstruction
from .projection import EquirectGeometry, crop_image, instruction_to_camera, remap
from .reid import (
    ColorHistogramProvider,
    TrajectoryStatsProvider,
    assign_identities,
    cluster_report_json,
    direct_person,
    load_features,
)
from .simulate import SCENARIOS, format_ground_truth, simulate_scene
from .smoothing import CameraTrackFitter, camera_tracks_to_json
from .tracking import GroupTracker, MultiObjectTracker, load_traces, traces_to_json

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: usage: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _write_atomic(path: Path, data):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _parse_geometry(text: str) -> FrameGeometry:
    m = re.fullmatch(r"(\d+)x(\d+)@([0-9.]+)", text)
    if not m:
        raise DataError(f"bad geometry {text!r}, expected WIDTHxHEIGHT@FPS")
    return FrameGeometry(int(m.group(1)), int(m.group(2)), float(m.group(3)))


def _load_stream_inputs(manifest):
    """Detection sets (masked, confidence filtered) plus geometries."""
    sets = []
    geometries = []
    for idx, spec in enumerate(manifest.streams):
        path = manifest.resolve(spec.detections)
        dset = load_detections(path, spec.geometry)
        if dset.stream != idx:
            raise DataError(
                f"{path}: header says stream {dset.stream}, manifest position is {idx}"
            )
        if spec.config.mask:
            mask = BinaryMask.load(manifest.resolve(spec.config.mask))
            dset = apply_mask(dset, mask)
        if spec.config.confidence_threshold > 0:
            dset = filter_confidence(dset, spec.config.confidence_threshold)
        sets.append(dset)
        geometries.append(dset.geometry)
    return sets, geometries


def _build_tracks(manifest, traces_dir, geometries):
    """Camera tracks per the manifest's per-stream settings."""
    tracks = []
    all_traces = []
    for idx, spec in enumerate(manifest.streams):
        path = Path(traces_dir) / f"traces_s{idx}.json"
        if not path.exists():
            raise DataError(f"missing trace file {path}")
        traces = load_traces(path)
        all_traces.extend(traces)
        fitter = CameraTrackFitter(geometries[idx], spec.config.fitting)
        wanted = [
            t
            for t in traces
            if (t.kind == "individual" and spec.config.track_individuals)
            or (t.kind == "group" and spec.config.track_groups)
        ]
        tracks.extend(fitter.fit(wanted).transform(wanted))
    return tracks, all_traces


def _production_range(sets) -> int:
    frames = max((d.max_frame() + 1 for d in sets), default=0)
    if frames <= 0:
        raise DataError("no frames in any stream; nothing to direct")
    return frames


def cmd_simulate(args) -> int:
    geometry = _parse_geometry(args.geometry)
    dset, truth = simulate_scene(
        args.scenario,
        args.frames,
        geometry,
        noise_sigma=args.noise_sigma,
        drop_rate=args.drop_rate,
        seed=args.seed,
        stream=args.stream,
    )
    out = Path(args.out)
    _write_atomic(out / f"detections_s{args.stream}.txt", format_detections(dset))
    _write_atomic(out / f"groundtruth_s{args.stream}.txt", format_ground_truth(truth))
    print(f"wrote {out / f'detections_s{args.stream}.txt'}")
    print(f"wrote {out / f'groundtruth_s{args.stream}.txt'}")
    return EXIT_OK


def cmd_track(args) -> int:
    manifest = load_manifest(args.manifest)
    sets, geometries = _load_stream_inputs(manifest)
    out = Path(args.out or manifest.output_dir or ".")
    for idx, (spec, dset) in enumerate(zip(manifest.streams, sets)):
        params = manifest.tracker_params(dset.geometry.fps)
        tracker = MultiObjectTracker(**params)
        individuals = tracker.fit(dset).traces_
        traces = list(individuals) if spec.config.track_individuals else []
        if spec.config.track_groups:
            grouper = GroupTracker(
                dset.geometry,
                outlier_fraction=manifest.group_outlier_fraction,
                max_coast=params["max_coast"],
                min_trace_len=params["min_trace_len"],
                min_observed_ratio=params["min_observed_ratio"],
            )
            traces.extend(grouper.fit(individuals).traces_)
        _write_atomic(out / f"traces_s{idx}.json", traces_to_json(traces))
        print(f"stream {idx}: {len(traces)} trace(s)")
    return EXIT_OK


def cmd_direct(args) -> int:
    manifest = load_manifest(args.manifest)
    sets, geometries = _load_stream_inputs(manifest)
    config = manifest.director_config(geometries)
    tracks, _ = _build_tracks(manifest, args.traces, geometries)
    frames = args.frames or _production_range(sets)
    timeline = select_timeline(tracks, 0, frames, config, sets)
    instructions = render_timeline(timeline, config)
    cuts = instructions_to_cuts(instructions, config.fps, frames / config.fps)
    out = Path(args.out or manifest.output_dir or ".")
    _write_atomic(out / "instructions.txt", format_instructions(instructions))
    _write_atomic(out / "cuts.json", cut_array_to_json(cuts))
    if args.dump_tracks:
        _write_atomic(out / "camera_tracks.json", camera_tracks_to_json(tracks))
    print(f"wrote {out / 'instructions.txt'} ({len(instructions)} frames)")
    print(f"wrote {out / 'cuts.json'} ({len(cuts.cuts)} cuts)")
    return EXIT_OK


def cmd_reid(args) -> int:
    manifest = load_manifest(args.manifest)
    sets, geometries = _load_stream_inputs(manifest)
    config = manifest.director_config(geometries)
    tracks, all_traces = _build_tracks(manifest, args.traces, geometries)
    traces_by_stream = {}
    for t in all_traces:
        traces_by_stream.setdefault(t.stream, []).append(t)

    features = None
    provider = None
    if args.features:
        features = load_features(args.features)
    elif args.provider == "geometry":
        provider = TrajectoryStatsProvider(geometries)
    elif args.provider == "histogram":
        if not args.frames_dir:
            raise DataError("--provider histogram needs --frames-dir")
        provider = ColorHistogramProvider(args.frames_dir)
    else:
        raise DataError("pick --features FILE or --provider geometry|histogram")

    clusters = assign_identities(
        tracks,
        provider,
        args.k,
        seed=args.seed,
        uncertainty_margin=args.uncertainty_margin,
        traces_by_stream=traces_by_stream,
        features=features,
    )
    out = Path(args.out or manifest.output_dir or ".")
    _write_atomic(out / "clusters.json", cluster_report_json(clusters))
    frames = args.frames or _production_range(sets)
    for cluster in range(args.k):
        timeline = direct_person(cluster, clusters, tracks, 0, frames, config, sets)
        instructions = render_timeline(timeline, config)
        _write_atomic(
            out / f"instructions_identity_{cluster}.txt",
            format_instructions(instructions),
        )
    print(f"wrote {out / 'clusters.json'} and {args.k} identity instruction file(s)")
    return EXIT_OK


def cmd_project(args) -> int:
    instructions = load_instructions(args.instructions)
    frames_dir = Path(args.frames_dir)
    out = Path(args.out)
    geometry = _parse_geometry(args.geometry) if args.geometry else None
    out_size = None
    if args.size:
        m = re.fullmatch(r"(\d+)x(\d+)", args.size)
        if not m:
            raise DataError(f"bad size {args.size!r}, expected WIDTHxHEIGHT")
        out_size = (int(m.group(1)), int(m.group(2)))
    for instr in instructions:
        src_path = frames_dir / f"s{instr.stream}_{instr.frame:06d}.ppm"
        if not src_path.exists():
            raise DataError(f"missing frame image {src_path} (frame {instr.frame})")
        img = load_ppm(src_path)
        if args.lens == "flat":
            geom = geometry or FrameGeometry(img.shape[1], img.shape[0], 30.0)
            view = crop_image(img, instr, geom)
        else:
            if args.span:
                eq = EquirectGeometry(img.shape[1], img.shape[0], args.span)
            else:
                eq = EquirectGeometry(img.shape[1], img.shape[0])
            size = out_size or (img.shape[1] // 4, img.shape[0] // 2)
            cam = instruction_to_camera(instr, eq, size)
            view = remap(img, cam, eq)
        _write_atomic(out / f"view_{instr.frame:06d}.ppm", write_ppm(view))
    print(f"wrote {len(instructions)} rectified frame(s) to {out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    a = load_cut_array(args.a)
    b = load_cut_array(args.b)
    report = comparison_report(
        a, b, sample_rate=args.sample_rate, same_angle=not args.raw_overlap
    )
    print(report)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="autodirector", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic detection scenario")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--geometry", default="1920x1080@30")
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--drop-rate", type=float, default=0.0)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("track", help="build traces from detection files")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("direct", help="select shots and emit instructions")
    p.add_argument("--manifest", required=True)
    p.add_argument("--traces", required=True, help="directory with traces_s<idx>.json")
    p.add_argument("--frames", type=int, help="override the production length")
    p.add_argument("--dump-tracks", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_direct)

    p = sub.add_parser("reid", help="cluster tracks into identities and direct each")
    p.add_argument("--manifest", required=True)
    p.add_argument("--traces", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--uncertainty-margin", type=float, default=0.8)
    p.add_argument("--features", help="precomputed feature file")
    p.add_argument("--provider", choices=("geometry", "histogram"))
    p.add_argument("--frames-dir", help="frame images for the histogram provider")
    p.add_argument("--frames", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_reid)

    p = sub.add_parser("project", help="render instructions into image crops/views")
    p.add_argument("--instructions", required=True)
    p.add_argument("--frames-dir", required=True)
    p.add_argument("--lens", required=True, choices=("flat", "equirect"))
    p.add_argument("--geometry", help="flat stream geometry WIDTHxHEIGHT@FPS")
    p.add_argument("--span", type=float, default=None,
                   help="equirect horizontal coverage in radians")
    p.add_argument("--size", help="output size WIDTHxHEIGHT for equirect views")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("evaluate", help="compare two cut arrays")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--sample-rate", type=float, default=30.0)
    p.add_argument("--raw-overlap", action="store_true",
                   help="ignore angles in the overlap metric")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: data: {exc}", file=sys.stderr)
        return EXIT_DATA


def entrypoint():
    raise SystemExit(main())
