"""Command-line entry point: generate / reconstruct / evaluate / ablate.

Every command is deterministic given its flags and seed; reruns produce
byte-identical artifacts (no timestamps are written).  Exit codes:
0 success, 2 validation error, 3 data error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from .composer import MODES, ReconstructionResult, reconstruct
from .core import Constants, Scene3D
from .errors import (
    DegenerateConfiguration,
    DegeneratePose,
    DegenerateScaling,
    FewerThanTwoPoses,
    InvalidSpec,
    IoFailure,
    JointCountMismatch,
    MissingGroundTruth,
    MissingJoint,
    PredictionNotFound,
    SceneLiftError,
    ScenePairMismatch,
    SchemaViolation,
    ZeroNormPose,
)
from .lifter import PredictionContext, PredictorSpec, make_predictor
from .metrics import aggregate_metrics, evaluate_scene_pair, write_report
from .skeleton import Skeleton
from .synth import (
    CameraConfig,
    GroundTruthFrame,
    SceneSpec,
    generate_dataset,
    load_dataset,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4

_VALIDATION_ERRORS = (InvalidSpec,)
_DATA_ERRORS = (
    IoFailure,
    SchemaViolation,
    PredictionNotFound,
    ScenePairMismatch,
    MissingGroundTruth,
    MissingJoint,
    DegeneratePose,
    DegenerateScaling,
    DegenerateConfiguration,
    FewerThanTwoPoses,
    JointCountMismatch,
    ZeroNormPose,
)

SCENES_SCHEMA_VERSION = 1

_ABLATION_COLUMNS = [
    "mode",
    "elevation_compensation",
    "rotation_compensation",
    "contact_heuristic",
    "pa_mpjpe_mm",
    "se_percent",
    "mte_mm",
    "rde_mm",
]


def _write_json(path: Path, obj: dict) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _parallel_map(fn, items: Sequence, workers: int) -> list:
    """Apply fn over items, preserving order; workers > 1 uses a thread pool."""
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read config file {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"{p}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise SchemaViolation(f"{p}: config must be a JSON object")
    return data


def _merge_config(args: argparse.Namespace, config: dict, keys: Sequence[str]) -> None:
    """Fill unset flags from the config file; flags override the file."""
    known = set(keys)
    for key in config:
        if key not in known:
            raise SchemaViolation(f"unknown config field {key!r}; known: {sorted(known)}")
    for key in keys:
        if getattr(args, key, None) is None and key in config:
            setattr(args, key, config[key])


def _parse_elevations(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise InvalidSpec(f"bad --elevations value {text!r}: {exc}") from exc
    if not values:
        raise InvalidSpec("--elevations must list at least one angle")
    return values


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    _merge_config(args, config, ["frames", "seed", "elevations", "out", "c", "pixels_per_unit", "scene_spec"])
    if args.frames is None or args.out is None:
        raise InvalidSpec("generate requires --frames and --out")
    frames = int(args.frames)
    if frames < 1:
        raise InvalidSpec(f"--frames must be >= 1, got {frames}")
    elevations = args.elevations if isinstance(args.elevations, list) else _parse_elevations(args.elevations or "20")
    c = float(args.c if args.c is not None else 10.0)
    ppu = float(args.pixels_per_unit if args.pixels_per_unit is not None else 3000.0)

    spec_fields = dict(args.scene_spec or {})
    spec_fields["seed"] = int(args.seed if args.seed is not None else 0)
    spec = SceneSpec.from_dict(spec_fields)
    cameras = [CameraConfig(elevation_deg=e, c=c, pixels_per_unit=ppu) for e in elevations]
    meta = generate_dataset(spec, cameras, frames, args.out)
    print(f"wrote {frames} frames to {args.out}")
    print(f"elevation stratification: {meta['stratification']}")
    return EXIT_OK


def _reconstruct_frames(
    frames: list[GroundTruthFrame],
    predictor,
    mode_name: str,
    constants: Constants,
    workers: int,
) -> list[ReconstructionResult]:
    mode = MODES[mode_name]

    def one(item: tuple[int, GroundTruthFrame]) -> ReconstructionResult:
        index, frame = item
        predictions = [
            predictor.predict(
                pose,
                PredictionContext(frame_id=frame.frame_id, frame_index=index, pose_index=k, ground_truth=frame),
            )
            for k, pose in enumerate(frame.poses2d)
        ]
        return reconstruct(frame.poses2d, predictions, mode, constants)

    return _parallel_map(one, list(enumerate(frames)), workers)


def _build_predictor_spec(args: argparse.Namespace) -> PredictorSpec:
    kind = args.predictor or "oracle"
    return PredictorSpec(
        kind=kind,
        sigma_d=float(args.sigma_d if args.sigma_d is not None else 0.0),
        sigma_theta=float(args.sigma_theta if args.sigma_theta is not None else 0.0),
        path=args.predictions,
        seed=int(args.seed if args.seed is not None else 0),
    )


def _constants(args: argparse.Namespace, dataset_c: float) -> Constants:
    c = float(args.c) if args.c is not None else dataset_c
    thr = float(args.contact_threshold_px) if args.contact_threshold_px is not None else 50.0
    return Constants(c=c, contact_threshold_px=thr)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    _merge_config(args, config, ["dataset", "out", "mode", "predictor", "predictions", "sigma_d",
                                 "sigma_theta", "seed", "c", "contact_threshold_px", "workers"])
    if args.dataset is None or args.out is None:
        raise InvalidSpec("reconstruct requires --dataset and --out")
    mode_name = args.mode or "full"
    if mode_name not in MODES:
        raise InvalidSpec(f"unknown mode {mode_name!r}; choose from {sorted(MODES)}")
    meta, frames = load_dataset(args.dataset, validate=False)
    predictor = make_predictor(_build_predictor_spec(args))
    constants = _constants(args, dataset_c=frames[0].c)
    workers = int(args.workers or 1)

    results = _reconstruct_frames(frames, predictor, mode_name, constants, workers)
    out = Path(args.out)
    scenes_dir = out / "scenes"
    scenes_dir.mkdir(parents=True, exist_ok=True)
    for frame, result in zip(frames, results):
        doc = {
            "schema_version": SCENES_SCHEMA_VERSION,
            "frame_id": frame.frame_id,
            **result.to_dict(),
        }
        _write_json(scenes_dir / f"{frame.frame_id}.json", doc)
    manifest = {
        "schema_version": SCENES_SCHEMA_VERSION,
        "dataset": str(args.dataset),
        "mode": mode_name,
        "predictor": _build_predictor_spec(args).kind,
        "constants": {"c": constants.c, "contact_threshold_px": constants.contact_threshold_px},
        "frame_count": len(frames),
        "skeleton": meta["skeleton"],
    }
    _write_json(out / "manifest.json", manifest)
    print(f"reconstructed {len(frames)} frames ({mode_name} mode) into {out}")
    return EXIT_OK


def _load_scenes(scene_dir: Path, skeleton: Skeleton) -> dict[str, Scene3D]:
    scenes = {}
    for path in sorted((scene_dir / "scenes").glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoFailure(f"cannot read scene file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        try:
            scenes[doc["frame_id"]] = Scene3D.from_dict(skeleton, doc["scene"])
        except KeyError as exc:
            raise SchemaViolation(f"{path}: missing field {exc.args[0]!r}") from exc
    if not scenes:
        raise IoFailure(f"no scene files found under {scene_dir}")
    return scenes


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    _merge_config(args, config, ["dataset", "scenes", "out", "workers"])
    if args.dataset is None or args.scenes is None or args.out is None:
        raise InvalidSpec("evaluate requires --dataset, --scenes and --out")
    meta, frames = load_dataset(args.dataset, validate=False)
    skeleton = Skeleton.from_dict(meta["skeleton"])
    scenes = _load_scenes(Path(args.scenes), skeleton)

    gt_ids = [f.frame_id for f in frames]
    if set(gt_ids) != set(scenes):
        missing = sorted(set(gt_ids) ^ set(scenes))
        raise ScenePairMismatch(f"frame sets differ between dataset and scenes: {missing[:5]}")

    workers = int(args.workers or 1)

    def one(frame: GroundTruthFrame):
        return evaluate_scene_pair(scenes[frame.frame_id], frame.world,
                                   mm_per_unit=frame.mm_per_unit, frame_id=frame.frame_id)

    per_frame = _parallel_map(one, frames, workers)
    report = aggregate_metrics(per_frame)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report(report, out / "report.json", out / "report.csv")
    agg = report.as_row()
    print(f"evaluated {len(frames)} frames")
    print(
        "aggregate: "
        f"PA-MPJPE {agg['pa_mpjpe_mm']:.3f} mm, SE {agg['se_percent']:+.3f}% "
        f"(|SE| {agg['se_percent_abs']:.3f}%), TE {agg['te_mm']:.3f} mm, RDE {agg['rde_mm']:.3f} mm"
    )
    return EXIT_OK


def cmd_ablate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    _merge_config(args, config, ["dataset", "out", "sigma_d", "sigma_theta", "seed",
                                 "c", "contact_threshold_px", "workers", "emit_plot_data"])
    if args.dataset is None or args.out is None:
        raise InvalidSpec("ablate requires --dataset and --out")
    meta, frames = load_dataset(args.dataset, validate=False)
    constants = _constants(args, dataset_c=frames[0].c)
    workers = int(args.workers or 1)
    spec = PredictorSpec(
        kind="noisy-oracle",
        sigma_d=float(args.sigma_d if args.sigma_d is not None else 0.0),
        sigma_theta=float(args.sigma_theta if args.sigma_theta is not None else 0.0),
        seed=int(args.seed if args.seed is not None else 0),
    )
    predictor = make_predictor(spec)

    # One set of noisy predictions shared by all four modes.
    def predictions_for(item):
        index, frame = item
        return [
            predictor.predict(
                pose,
                PredictionContext(frame_id=frame.frame_id, frame_index=index, pose_index=k, ground_truth=frame),
            )
            for k, pose in enumerate(frame.poses2d)
        ]

    all_predictions = _parallel_map(predictions_for, list(enumerate(frames)), workers)

    rows = []
    reports = {}
    for mode_name, mode in MODES.items():
        def one(item, mode=mode):
            frame, predictions = item
            result = reconstruct(frame.poses2d, predictions, mode, constants)
            return evaluate_scene_pair(result.scene, frame.world,
                                       mm_per_unit=frame.mm_per_unit, frame_id=frame.frame_id)

        per_frame = _parallel_map(one, list(zip(frames, all_predictions)), workers)
        report = aggregate_metrics(per_frame)
        reports[mode_name] = report
        rows.append({
            "mode": mode_name,
            "elevation_compensation": mode.elevation_compensation,
            "rotation_compensation": mode.rotation_compensation,
            "contact_heuristic": mode.contact_heuristic,
            "pa_mpjpe_mm": report.pa_mpjpe,
            "se_percent": report.se_percent_abs,
            "mte_mm": report.te,
            "rde_mm": report.rde,
        })

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_lines = [",".join(_ABLATION_COLUMNS)]
    for row in rows:
        csv_lines.append(",".join(str(row[col]) for col in _ABLATION_COLUMNS))
    _write_text(out / "ablation.csv", "\n".join(csv_lines) + "\n")

    mark = {True: "yes", False: "no"}
    text_lines = [
        f"{'mode':<10} {'elev':<5} {'rot':<5} {'contact':<8} {'PA-MPJPE':>10} {'SE':>9} {'MTE':>10} {'RDE':>10}",
    ]
    for row in rows:
        text_lines.append(
            f"{row['mode']:<10} {mark[row['elevation_compensation']]:<5} "
            f"{mark[row['rotation_compensation']]:<5} {mark[row['contact_heuristic']]:<8} "
            f"{row['pa_mpjpe_mm']:>10.3f} {'+/-' + format(row['se_percent'], '.2f') + '%':>9} "
            f"{row['mte_mm']:>10.3f} {row['rde_mm']:>10.3f}"
        )
    table = "\n".join(text_lines) + "\n"
    _write_text(out / "ablation.txt", table)
    print(table, end="")

    if args.emit_plot_data:
        plot_lines = ["mode,metric,frame_id,value"]
        for mode_name, report in reports.items():
            for fm in report.frames:
                row = fm.as_row()
                for metric in ("pa_mpjpe_mm", "se_percent", "te_mm", "rde_mm"):
                    plot_lines.append(f"{mode_name},{metric},{fm.frame_id},{row[metric]}")
        _write_text(out / "plot_data.csv", "\n".join(plot_lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scenelift",
        description="Multi-person 2D-to-3D scene reconstruction: synthetic data, "
                    "reconstruction, evaluation and ablation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="JSON config file; flags override it")
        p.add_argument("--seed", type=int, default=None, help="Seed (default 0)")

    gen = sub.add_parser("generate", help="Generate a synthetic dataset")
    common(gen)
    gen.add_argument("--frames", type=int, default=None, help="Number of frames")
    gen.add_argument("--elevations", default=None,
                     help="Comma-separated camera elevations in degrees (round-robin sweep)")
    gen.add_argument("--out", default=None, help="Output dataset directory")
    gen.add_argument("--c", type=float, default=None, help="Camera-root distance (default 10)")
    gen.add_argument("--pixels-per-unit", dest="pixels_per_unit", type=float, default=None,
                     help="Virtual image pixel scale (default 3000)")

    rec = sub.add_parser("reconstruct", help="Reconstruct scenes from a dataset")
    common(rec)
    rec.add_argument("--dataset", default=None, help="Dataset directory")
    rec.add_argument("--out", default=None, help="Output directory for scenes")
    rec.add_argument("--mode", default=None, choices=sorted(MODES), help="Ablation mode (default full)")
    rec.add_argument("--predictor", default=None, choices=["oracle", "noisy-oracle", "file"],
                     help="Predictor kind (default oracle)")
    rec.add_argument("--predictions", default=None, help="Prediction file for the file predictor")
    rec.add_argument("--sigma-d", dest="sigma_d", type=float, default=None,
                     help="Depth-offset noise sigma (noisy-oracle)")
    rec.add_argument("--sigma-theta", dest="sigma_theta", type=float, default=None,
                     help="Elevation noise sigma in radians (noisy-oracle)")
    rec.add_argument("--c", type=float, default=None, help="Override camera-root distance")
    rec.add_argument("--contact-threshold-px", dest="contact_threshold_px", type=float, default=None,
                     help="Contact heuristic pixel threshold (default 50)")
    rec.add_argument("--workers", type=int, default=None, help="Parallel workers (default 1)")

    ev = sub.add_parser("evaluate", help="Evaluate reconstructed scenes against ground truth")
    common(ev)
    ev.add_argument("--dataset", default=None, help="Dataset directory (ground truth)")
    ev.add_argument("--scenes", default=None, help="Reconstruction output directory")
    ev.add_argument("--out", default=None, help="Output directory for the metric report")
    ev.add_argument("--workers", type=int, default=None, help="Parallel workers (default 1)")

    ab = sub.add_parser("ablate", help="Run all four ablation modes and tabulate metrics")
    common(ab)
    ab.add_argument("--dataset", default=None, help="Dataset directory")
    ab.add_argument("--out", default=None, help="Output directory for the ablation table")
    ab.add_argument("--sigma-d", dest="sigma_d", type=float, default=None,
                    help="Depth-offset noise sigma")
    ab.add_argument("--sigma-theta", dest="sigma_theta", type=float, default=None,
                    help="Elevation noise sigma in radians")
    ab.add_argument("--c", type=float, default=None, help="Override camera-root distance")
    ab.add_argument("--contact-threshold-px", dest="contact_threshold_px", type=float, default=None,
                    help="Contact heuristic pixel threshold (default 50)")
    ab.add_argument("--workers", type=int, default=None, help="Parallel workers (default 1)")
    ab.add_argument("--emit-plot-data", dest="emit_plot_data", action="store_true", default=False,
                    help="Also write long-format per-frame metric CSV")
    return parser


_COMMANDS = {
    "generate": cmd_generate,
    "reconstruct": cmd_reconstruct,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"usage: run `scenelift {args.command} --help` for flag documentation", file=sys.stderr)
        return EXIT_VALIDATION
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except SceneLiftError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
