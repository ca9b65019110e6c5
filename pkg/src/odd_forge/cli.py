"""Command line entry point.

Subcommands: validate an ODD spec, sample poses from its cone, label
those poses against a runway, generate an approach scenario, and verify
a dataset against the data quality requirements.

Exit codes: 0 success / requirements met, 1 requirement or constraint
failure, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import dataset_io, dqr_verify, sampling
from .errors import (ConfigurationError, DatasetIOError, GenerationError,
                     InvalidInputError, OddForgeError)
from .geometry import CameraModel
from .odd_spec import ApproachCone, OddSpec, Pose, load_spec, validate_spec

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _load_odd(path: str | None) -> OddSpec:
    if path is None:
        return OddSpec(version=1, cone=ApproachCone.generic())
    return load_spec(path)


def _load_camera(path: str | None) -> CameraModel:
    if path is None:
        return CameraModel.default()
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read camera config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            f"camera config is not valid JSON: {exc}") from exc
    try:
        width = int(obj["width_px"])
        height = int(obj["height_px"])
        return CameraModel(
            width_px=width,
            height_px=height,
            focal_px=float(obj["focal_px"]),
            cx=float(obj.get("cx", width / 2)),
            cy=float(obj.get("cy", height / 2)),
            crop_top_px=int(obj.get("crop_top_px", 0)),
            crop_bottom_px=int(obj.get("crop_bottom_px", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad camera config: {exc}") from exc


def _runway_from_db(path: str, runway_id: str):
    db = dataset_io.load_runway_db(path)
    if runway_id not in db:
        raise ConfigurationError(
            f"runway {runway_id!r} not in database ({len(db)} entries)")
    return db[runway_id]


def cmd_validate(args: argparse.Namespace) -> int:
    spec = _load_odd(args.spec)
    result = validate_spec(spec)
    if result.ok:
        print(f"spec version {spec.version}: ok "
              f"({len(spec.restrictions)} restrictions)")
        return EXIT_OK
    for violation in result.violations:
        print(f"violation [{violation.code}]: {violation.message}")
    print(f"spec version {spec.version}: {len(result.violations)} "
          "violation(s)")
    return EXIT_FAIL


def cmd_sample(args: argparse.Namespace) -> int:
    spec = _load_odd(args.spec)
    config = sampling.SamplingConfig(count=args.count, seed=args.seed,
                                     strategy=args.strategy)
    poses = sampling.sample_cone(spec.cone, config)
    dataset_io.write_poses(poses, args.out)
    print(f"wrote {len(poses)} poses to {args.out}")
    return EXIT_OK


def cmd_label(args: argparse.Namespace) -> int:
    camera = _load_camera(args.camera)
    runway = _runway_from_db(args.runway_db, args.runway)
    poses = dataset_io.load_poses(args.poses)
    prefix = args.id_prefix if args.id_prefix else runway.id
    records = []
    skipped = 0
    for i, pose in enumerate(poses):
        record = dataset_io.make_synthetic_record(
            image_id=f"{prefix}_{i:06d}", pose=pose, runway=runway,
            camera=camera, margin_px=args.margin_px)
        if args.require_visible and not record.label.fully_visible:
            skipped += 1
            continue
        records.append(record)
    dataset_io.write_labels(records, args.out, format=args.format)
    note = f", skipped {skipped} not fully visible" if skipped else ""
    print(f"wrote {len(records)} labels to {args.out}{note}")
    return EXIT_OK


def cmd_scenario(args: argparse.Namespace) -> int:
    spec = _load_odd(args.spec)
    runway = _runway_from_db(args.runway_db, args.runway)
    bounds = spec.cone.canonical_bounds()
    entry_yaw = args.crab_yaw if args.kind == "crab_decrab" else 0.0
    entry = Pose(
        along_track_m=(args.entry_distance_m if args.entry_distance_m
                       is not None else bounds["along_track"].hi),
        lateral_path_deg=args.entry_lateral_deg,
        vertical_path_deg=(args.entry_vertical_deg if args.entry_vertical_deg
                           is not None else bounds["vertical_path"].mid),
        yaw_deg=entry_yaw,
        pitch_deg=(args.entry_pitch_deg if args.entry_pitch_deg is not None
                   else bounds["pitch"].mid),
        roll_deg=0.0,
    )
    if args.kind == "crab_decrab":
        kind = sampling.ScenarioKind.crab_decrab(args.crab_yaw,
                                                 args.decrab_start_m)
    else:
        kind = sampling.ScenarioKind.nominal()
    trajectory = sampling.generate_trajectory(
        entry, args.frames, kind, cone=spec.cone,
        frame_interval_s=args.interval_s)
    dataset_io.write_scenario(trajectory, runway, args.out)
    print(f"wrote {args.frames} keyframes to {args.out}")
    return EXIT_OK


def _load_split(path: str, name: str) -> dataset_io.DatasetSplit:
    result = dataset_io.load_records(path, split_name=name)
    for rejection in result.rejections[:10]:
        print(f"warning: {name} row {rejection.row} rejected: "
              f"{rejection.reason}", file=sys.stderr)
    if len(result.rejections) > 10:
        print(f"warning: {len(result.rejections) - 10} further rejections "
              f"in {name}", file=sys.stderr)
    return result.split


def cmd_verify(args: argparse.Namespace) -> int:
    spec = _load_odd(args.spec)
    camera = _load_camera(args.camera)
    runway_db = dataset_io.load_runway_db(args.runway_db) \
        if args.runway_db else {}
    config = dqr_verify.VerifyConfig()
    if args.thresholds:
        try:
            overrides = json.loads(Path(args.thresholds)
                                   .read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigurationError(
                f"cannot read thresholds: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(
                f"thresholds file is not valid JSON: {exc}") from exc
        merged = config.to_dict()
        merged.update(overrides)
        config = dqr_verify.VerifyConfig.from_dict(merged)

    splits = {"train": _load_split(args.train, "train"),
              "test": _load_split(args.test, "test")}
    if args.real:
        splits["real_subset"] = _load_split(args.real, "real_subset")
    dataset_io.ensure_disjoint(*splits.values())

    report = dqr_verify.run_all(splits, spec, config, camera, runway_db)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dqr_verify.write_report(report, out_dir / "report.json")
    histograms = dqr_verify.write_histograms(report,
                                             out_dir / "histograms")
    figure_paths = []
    if args.figures:
        from . import figures
        figure_paths = figures.render_report_figures(
            report, splits, out_dir / "figures")

    for result in report.results:
        failing = [c for c in result.evidence.get("checks", [])
                   if not c["ok"]]
        detail = ""
        if failing and result.verdict == dqr_verify.FAIL:
            worst = failing[0]
            detail = (f" ({worst['name']} = {worst['value']:.4f}, "
                      f"needs {worst['op']} {worst['threshold']})")
        elif "not_applicable" in result.evidence:
            detail = f" (not applicable: {result.evidence['not_applicable']})"
        print(f"{result.requirement}: {result.verdict}{detail}")
    print(f"report: {out_dir / 'report.json'} "
          f"({len(histograms)} histogram CSVs, "
          f"{len(figure_paths)} figures)")
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odd-forge",
        description="ODD specification, runway labeling, and dataset "
                    "verification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate an ODD spec file")
    p.add_argument("--spec", help="ODD spec JSON (default: generic cone)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sample", help="sample poses from the approach cone")
    p.add_argument("--spec", help="ODD spec JSON (default: generic cone)")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strategy", choices=("uniform", "stratified"),
                   default="uniform")
    p.add_argument("--out", required=True, help="output pose CSV")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("label", help="project runway labels for poses")
    p.add_argument("--poses", required=True, help="pose CSV from 'sample'")
    p.add_argument("--runway-db", required=True, help="runway database JSON")
    p.add_argument("--runway", required=True, help="runway id to label")
    p.add_argument("--camera", help="camera config JSON (default model "
                                    "if omitted)")
    p.add_argument("--margin-px", type=float, default=None,
                   help="bbox margin in pixels (default 5)")
    p.add_argument("--require-visible", action="store_true",
                   help="drop poses whose runway is not fully visible")
    p.add_argument("--id-prefix", default=None,
                   help="image id prefix (default: the runway id); give "
                        "each split its own prefix so ids stay disjoint")
    p.add_argument("--out", required=True, help="output label file")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("scenario", help="generate approach trajectory "
                                        "keyframes")
    p.add_argument("--spec", help="ODD spec JSON (default: generic cone)")
    p.add_argument("--runway-db", required=True)
    p.add_argument("--runway", required=True)
    p.add_argument("--kind", choices=("nominal", "crab_decrab"),
                   default="nominal")
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--interval-s", type=float, default=1.0)
    p.add_argument("--crab-yaw", type=float, default=5.0,
                   help="crab yaw in degrees (crab_decrab only)")
    p.add_argument("--decrab-start-m", type=float, default=1000.0)
    p.add_argument("--entry-distance-m", type=float, default=None)
    p.add_argument("--entry-lateral-deg", type=float, default=0.0)
    p.add_argument("--entry-vertical-deg", type=float, default=None)
    p.add_argument("--entry-pitch-deg", type=float, default=None)
    p.add_argument("--out", required=True, help="output keyframe JSON")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("verify", help="verify a dataset against the data "
                                      "quality requirements")
    p.add_argument("--train", required=True, help="train split label file")
    p.add_argument("--test", required=True, help="test split label file")
    p.add_argument("--real", help="optional real-footage label file")
    p.add_argument("--spec", help="ODD spec JSON (default: generic cone)")
    p.add_argument("--runway-db", help="runway database JSON for "
                                       "reprojection checks")
    p.add_argument("--camera", help="camera config JSON")
    p.add_argument("--thresholds", help="JSON file overriding thresholds")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                   default=True, help="render report figures")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GenerationError as exc:
        parameter = f" (parameter: {exc.parameter})" if exc.parameter else ""
        print(f"error: {exc}{parameter}", file=sys.stderr)
        return EXIT_FAIL
    except (ConfigurationError, DatasetIOError, InvalidInputError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OddForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
