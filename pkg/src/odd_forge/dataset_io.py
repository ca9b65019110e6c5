"""Dataset record model plus CSV/JSON serialization.

The delimited label format is the interchange surface with training
pipelines, so writing is deterministic (shortest round-trip float
representation, fixed column order) and loading is forgiving: bad rows
are collected as rejections instead of aborting the run, up to the point
where the majority of the file is bad.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import (ConfigurationError, DatasetFormatError, DatasetIOError,
                     SplitIntegrityError)
from .geometry import (CameraModel, Georef, ImageLabel, RunwayGeometry,
                       project_runway, slant_distance, to_cartesian)
from .odd_spec import ConceptTag, Pose
from .sampling import Trajectory, to_geodetic

SYNTHETIC = "synthetic"
REAL = "real"

SCHEMA_COMMENT = "# odd-forge labels v1"

# Canonical columns, in order.  Corner order is near-left, near-right,
# far-right, far-left; pose columns are empty for real footage.
CANONICAL_COLUMNS = (
    "image_id", "source", "airport", "runway", "width", "height",
    "x1", "y1", "x2", "y2", "x3", "y3", "x4", "y4",
    "bbox_xmin", "bbox_ymin", "bbox_xmax", "bbox_ymax",
    "slant_distance_m", "time_to_landing_s",
    "along_track_m", "lateral_deg", "vertical_deg",
    "yaw_deg", "pitch_deg", "roll_deg",
)

# Extension columns carried for lossless round-trips: corners normalized
# by image size, the visibility verdict, and the bbox margin.
EXTENSION_COLUMNS = (
    "nx1", "ny1", "nx2", "ny2", "nx3", "ny3", "nx4", "ny4",
    "fully_visible", "margin_px", "concepts",
)

_POSE_COLUMNS = ("along_track_m", "lateral_deg", "vertical_deg",
                 "yaw_deg", "pitch_deg", "roll_deg")


@dataclass(frozen=True)
class DatasetRecord:
    """One labeled image, synthetic or real."""

    image_id: str
    source: str
    airport: str
    runway: str
    image_size: tuple[int, int]
    label: ImageLabel
    pose: Pose | None = None
    slant_distance_m: float | None = None
    time_to_landing_s: float | None = None
    concepts: tuple[ConceptTag, ...] = ()
    extra: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class DatasetSplit:
    """A named collection of records ('train', 'test', or 'real_subset')."""

    name: str
    records: tuple[DatasetRecord, ...]

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class RowRejection:
    row: int
    reason: str


@dataclass(frozen=True)
class LoadResult:
    split: DatasetSplit
    rejections: tuple[RowRejection, ...] = ()


def record_schema_errors(record: DatasetRecord) -> list[str]:
    """All schema violations for one record; empty means acceptable."""
    errors: list[str] = []
    if record.source not in (SYNTHETIC, REAL):
        errors.append(f"unknown source {record.source!r}")
    if not record.image_id:
        errors.append("empty image_id")
    w, h = record.image_size
    if w <= 0 or h <= 0:
        errors.append(f"non-positive image size {record.image_size}")
    if record.source == SYNTHETIC:
        if record.pose is None:
            errors.append("synthetic record without a pose")
        if record.slant_distance_m is None:
            errors.append("synthetic record without slant_distance_m")
    elif record.source == REAL and record.pose is not None:
        errors.append("real record carries a pose")
    bbox = record.label.bbox
    if all(math.isfinite(v) for v in bbox):
        if bbox[0] > bbox[2] or bbox[1] > bbox[3]:
            errors.append(f"inverted bbox {bbox}")
    if record.label.fully_visible:
        for u, v in record.label.corners:
            if not (math.isfinite(u) and math.isfinite(v)
                    and 0 <= u <= w and 0 <= v <= h):
                errors.append(
                    f"fully_visible with corner ({u}, {v}) outside image")
                break
    return errors


def make_synthetic_record(image_id: str, pose: Pose, runway: RunwayGeometry,
                          camera: CameraModel,
                          margin_px: float | None = None,
                          concepts: tuple[ConceptTag, ...] = ()
                          ) -> DatasetRecord:
    """Project a pose and package the result as a dataset record."""
    if margin_px is None:
        label = project_runway(pose, runway, camera)
    else:
        label = project_runway(pose, runway, camera, margin_px=margin_px)
    return DatasetRecord(
        image_id=image_id,
        source=SYNTHETIC,
        airport=runway.airport,
        runway=runway.id,
        image_size=(camera.width_px, camera.height_px),
        label=label,
        pose=pose,
        slant_distance_m=slant_distance(to_cartesian(pose)),
        concepts=concepts,
    )


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _record_to_row(record: DatasetRecord) -> dict[str, str]:
    w, h = record.image_size
    row = {
        "image_id": record.image_id,
        "source": record.source,
        "airport": record.airport,
        "runway": record.runway,
        "width": str(w),
        "height": str(h),
        "slant_distance_m": _fmt(record.slant_distance_m),
        "time_to_landing_s": _fmt(record.time_to_landing_s),
        "fully_visible": _fmt(record.label.fully_visible),
        "margin_px": _fmt(record.label.margin_px),
    }
    for i, (u, v) in enumerate(record.label.corners, start=1):
        row[f"x{i}"] = _fmt(u)
        row[f"y{i}"] = _fmt(v)
        row[f"nx{i}"] = _fmt(u / w)
        row[f"ny{i}"] = _fmt(v / h)
    for name, value in zip(("bbox_xmin", "bbox_ymin", "bbox_xmax", "bbox_ymax"),
                           record.label.bbox):
        row[name] = _fmt(value)
    if record.pose is not None:
        pose = record.pose
        row.update({
            "along_track_m": _fmt(pose.along_track_m),
            "lateral_deg": _fmt(pose.lateral_path_deg),
            "vertical_deg": _fmt(pose.vertical_path_deg),
            "yaw_deg": _fmt(pose.yaw_deg),
            "pitch_deg": _fmt(pose.pitch_deg),
            "roll_deg": _fmt(pose.roll_deg),
        })
    else:
        row.update({name: "" for name in _POSE_COLUMNS})
    if record.concepts:
        row["concepts"] = json.dumps(
            [{"label": c.label, "category": c.category}
             for c in record.concepts],
            separators=(",", ":"))
    else:
        row["concepts"] = ""
    for key, value in record.extra:
        row[key] = value
    return row


def _parse_float(cell: str, column: str) -> float | None:
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError as exc:
        raise ValueError(f"column {column}: {exc}") from exc


def _row_to_record(row: Mapping[str, str],
                   extra_columns: tuple[str, ...]) -> DatasetRecord:
    w = int(row["width"])
    h = int(row["height"])
    corners = []
    for i in range(1, 5):
        u = _parse_float(row[f"x{i}"], f"x{i}")
        v = _parse_float(row[f"y{i}"], f"y{i}")
        if u is None or v is None:
            raise ValueError(f"corner {i} is missing")
        corners.append((u, v))
        for axis, (name, absolute, size) in enumerate(
                ((f"nx{i}", u, w), (f"ny{i}", v, h))):
            normalized = _parse_float(row.get(name, ""), name)
            if (normalized is not None and math.isfinite(absolute)
                    and abs(normalized - absolute / size) > 1e-9):
                raise ValueError(
                    f"{name} inconsistent with {'xy'[axis]}{i}")
    bbox = tuple(_parse_float(row[name], name)
                 for name in ("bbox_xmin", "bbox_ymin",
                              "bbox_xmax", "bbox_ymax"))
    if any(v is None for v in bbox):
        raise ValueError("bbox is incomplete")

    visible_cell = row.get("fully_visible", "").strip().lower()
    if visible_cell in ("true", "false"):
        fully_visible = visible_cell == "true"
    elif visible_cell == "":
        fully_visible = all(math.isfinite(c) for uv in corners for c in uv)
    else:
        raise ValueError(f"fully_visible: bad boolean {visible_cell!r}")
    margin = _parse_float(row.get("margin_px", ""), "margin_px")

    pose_cells = [row.get(name, "") for name in _POSE_COLUMNS]
    if all(cell == "" for cell in pose_cells):
        pose = None
    elif any(cell == "" for cell in pose_cells):
        raise ValueError("pose columns are partially filled")
    else:
        values = [_parse_float(cell, name)
                  for name, cell in zip(_POSE_COLUMNS, pose_cells)]
        pose = Pose(*values)

    concepts_cell = row.get("concepts", "")
    if concepts_cell:
        try:
            concepts = tuple(ConceptTag(item["label"], item["category"])
                             for item in json.loads(concepts_cell))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"concepts: {exc}") from exc
    else:
        concepts = ()

    label = ImageLabel(corners=tuple(corners), bbox=tuple(bbox),
                       fully_visible=fully_visible,
                       margin_px=0.0 if margin is None else margin)
    extra = tuple((name, row[name]) for name in extra_columns
                  if row.get(name, "") != "")
    return DatasetRecord(
        image_id=row["image_id"],
        source=row["source"],
        airport=row.get("airport", ""),
        runway=row.get("runway", ""),
        image_size=(w, h),
        label=label,
        pose=pose,
        slant_distance_m=_parse_float(row["slant_distance_m"],
                                      "slant_distance_m"),
        time_to_landing_s=_parse_float(row["time_to_landing_s"],
                                       "time_to_landing_s"),
        concepts=concepts,
        extra=extra,
    )


def _extra_columns(records: Iterable[DatasetRecord]) -> tuple[str, ...]:
    seen: dict[str, None] = {}
    for record in records:
        for key, _ in record.extra:
            seen.setdefault(key, None)
    return tuple(seen)


def write_labels(records: Iterable[DatasetRecord], path: str | Path,
                 format: str = "csv") -> None:
    """Write records to ``path`` as CSV or JSON.

    Identical records always produce identical bytes, which makes dataset
    artifacts diffable and cacheable.
    """
    records = list(records)
    path = Path(path)
    if format == "csv":
        columns = (CANONICAL_COLUMNS + EXTENSION_COLUMNS
                   + _extra_columns(records))
        try:
            with path.open("w", newline="", encoding="utf-8") as fh:
                fh.write(SCHEMA_COMMENT + "\n")
                writer = csv.DictWriter(fh, fieldnames=columns,
                                        lineterminator="\n",
                                        restval="")
                writer.writeheader()
                for record in records:
                    writer.writerow(_record_to_row(record))
        except OSError as exc:
            raise DatasetIOError(f"cannot write {path}: {exc}") from exc
    elif format == "json":
        payload = {"schema": "odd-forge-labels", "version": 1,
                   "records": [record_to_dict(r) for r in records]}
        try:
            path.write_text(json.dumps(payload, indent=2, sort_keys=True)
                            + "\n", encoding="utf-8")
        except OSError as exc:
            raise DatasetIOError(f"cannot write {path}: {exc}") from exc
    else:
        raise ConfigurationError(f"unknown label format {format!r}")


def record_to_dict(record: DatasetRecord) -> dict:
    pose = record.pose
    return {
        "image_id": record.image_id,
        "source": record.source,
        "airport": record.airport,
        "runway": record.runway,
        "image_size": list(record.image_size),
        "corners": [list(c) for c in record.label.corners],
        "corners_normalized": [
            [u / record.image_size[0], v / record.image_size[1]]
            for u, v in record.label.corners],
        "bbox": list(record.label.bbox),
        "fully_visible": record.label.fully_visible,
        "margin_px": record.label.margin_px,
        "slant_distance_m": record.slant_distance_m,
        "time_to_landing_s": record.time_to_landing_s,
        "pose": None if pose is None else {
            "along_track_m": pose.along_track_m,
            "lateral_path_deg": pose.lateral_path_deg,
            "vertical_path_deg": pose.vertical_path_deg,
            "yaw_deg": pose.yaw_deg,
            "pitch_deg": pose.pitch_deg,
            "roll_deg": pose.roll_deg,
        },
        "concepts": [{"label": c.label, "category": c.category}
                     for c in record.concepts],
        "extra": dict(record.extra),
    }


def record_from_dict(obj: Mapping) -> DatasetRecord:
    pose = obj.get("pose")
    label = ImageLabel(
        corners=tuple((float(u), float(v)) for u, v in obj["corners"]),
        bbox=tuple(float(v) for v in obj["bbox"]),
        fully_visible=bool(obj["fully_visible"]),
        margin_px=float(obj.get("margin_px", 0.0)),
    )
    return DatasetRecord(
        image_id=obj["image_id"],
        source=obj["source"],
        airport=obj.get("airport", ""),
        runway=obj.get("runway", ""),
        image_size=tuple(int(v) for v in obj["image_size"]),
        label=label,
        pose=None if pose is None else Pose(**pose),
        slant_distance_m=obj.get("slant_distance_m"),
        time_to_landing_s=obj.get("time_to_landing_s"),
        concepts=tuple(ConceptTag(c["label"], c["category"])
                       for c in obj.get("concepts", [])),
        extra=tuple(sorted((obj.get("extra") or {}).items())),
    )


def _infer_format(path: Path, format: str | None) -> str:
    if format is not None:
        return format
    return "json" if path.suffix.lower() == ".json" else "csv"


def load_records(path: str | Path, format: str | None = None,
                 split_name: str = "train") -> LoadResult:
    """Load a label file into a split, collecting per-row rejections.

    Raises DatasetFormatError when required columns are missing or when
    more than half of the data rows are rejected, and DatasetIOError when
    the file cannot be read at all.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc

    records: list[DatasetRecord] = []
    rejections: list[RowRejection] = []
    seen_ids: set[str] = set()

    def admit(record: DatasetRecord, row_num: int) -> None:
        problems = record_schema_errors(record)
        if record.image_id in seen_ids:
            problems.append(f"duplicate image_id {record.image_id!r}")
        if problems:
            rejections.append(RowRejection(row_num, "; ".join(problems)))
            return
        seen_ids.add(record.image_id)
        records.append(record)

    if fmt == "csv":
        lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
        reader = csv.DictReader(lines)
        header = tuple(reader.fieldnames or ())
        missing = [c for c in CANONICAL_COLUMNS if c not in header]
        if missing:
            raise DatasetFormatError(
                f"{path}: missing required columns {missing}")
        known = set(CANONICAL_COLUMNS) | set(EXTENSION_COLUMNS)
        extra_columns = tuple(c for c in header if c not in known)
        total = 0
        for row_num, row in enumerate(reader, start=1):
            total += 1
            try:
                record = _row_to_record(row, extra_columns)
            except (ValueError, TypeError) as exc:
                rejections.append(RowRejection(row_num, str(exc)))
                continue
            admit(record, row_num)
    elif fmt == "json":
        try:
            payload = json.loads(text)
            raw_records = payload["records"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DatasetFormatError(f"{path}: {exc}") from exc
        total = len(raw_records)
        for row_num, obj in enumerate(raw_records, start=1):
            try:
                record = record_from_dict(obj)
            except (KeyError, TypeError, ValueError) as exc:
                rejections.append(RowRejection(row_num, str(exc)))
                continue
            admit(record, row_num)
    else:
        raise ConfigurationError(f"unknown label format {fmt!r}")

    if total > 0 and len(rejections) * 2 > total:
        raise DatasetFormatError(
            f"{path}: {len(rejections)} of {total} rows rejected; "
            "format is likely wrong")
    return LoadResult(DatasetSplit(split_name, tuple(records)),
                      tuple(rejections))


def ensure_disjoint(*splits: DatasetSplit) -> None:
    """Raise SplitIntegrityError if any image id appears in two splits."""
    owner: dict[str, str] = {}
    clashes: list[str] = []
    for split in splits:
        for record in split.records:
            prev = owner.setdefault(record.image_id, split.name)
            if prev != split.name:
                clashes.append(record.image_id)
    if clashes:
        preview = ", ".join(sorted(clashes)[:5])
        raise SplitIntegrityError(
            f"{len(clashes)} image ids shared between splits: {preview}")


def write_scenario(trajectory: Trajectory, runway: RunwayGeometry,
                   path: str | Path) -> None:
    """Write trajectory keyframes as geodetic JSON.

    Each keyframe is {frame, lat, lon, alt_m, yaw, pitch, roll}; the
    runway must carry a georeference.
    """
    if runway.georef is None:
        raise ConfigurationError(
            f"runway {runway.id!r} has no georeference")
    frames = []
    for i, pose in enumerate(trajectory.frames):
        cpose = to_cartesian(pose)
        lat, lon, alt = to_geodetic(cpose, runway.georef)
        frames.append({
            "frame": i,
            "lat": lat,
            "lon": lon,
            "alt_m": alt,
            "yaw": pose.yaw_deg,
            "pitch": pose.pitch_deg,
            "roll": pose.roll_deg,
        })
    try:
        Path(path).write_text(json.dumps(frames, indent=2) + "\n",
                              encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(f"cannot write {path}: {exc}") from exc


POSE_COLUMNS = ("along_track_m", "lateral_deg", "vertical_deg",
                "yaw_deg", "pitch_deg", "roll_deg", "x_m", "y_m", "z_m")


def write_poses(poses: Iterable[Pose], path: str | Path) -> None:
    """Write sampled poses as CSV, with world coordinates alongside.

    Output bytes are deterministic for a given pose sequence.
    """
    lines = ["# odd-forge poses v1", ",".join(POSE_COLUMNS)]
    for pose in poses:
        cpose = to_cartesian(pose)
        cells = (pose.along_track_m, pose.lateral_path_deg,
                 pose.vertical_path_deg, pose.yaw_deg, pose.pitch_deg,
                 pose.roll_deg, cpose.x_m, cpose.y_m, cpose.z_m)
        lines.append(",".join(repr(c) for c in cells))
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(f"cannot write {path}: {exc}") from exc


def load_poses(path: str | Path) -> list[Pose]:
    """Read a pose CSV back into Pose objects (world columns ignored)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetIOError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    reader = csv.DictReader(lines)
    header = set(reader.fieldnames or ())
    needed = set(_POSE_COLUMNS)
    if not needed <= header:
        raise DatasetFormatError(
            f"{path}: pose file missing columns {sorted(needed - header)}")
    poses = []
    for row_num, row in enumerate(reader, start=1):
        try:
            poses.append(Pose(*(float(row[c]) for c in _POSE_COLUMNS)))
        except (TypeError, ValueError) as exc:
            raise DatasetFormatError(
                f"{path}: bad pose row {row_num}: {exc}") from exc
    return poses


def load_runway_db(path: str | Path) -> dict[str, RunwayGeometry]:
    """Load the runway database JSON into a mapping keyed by runway id."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigurationError(f"cannot read runway db: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"runway db is not valid JSON: {exc}") from exc
    rows = payload.get("runways") if isinstance(payload, Mapping) else payload
    if not isinstance(rows, list):
        raise ConfigurationError("runway db must be a list or have 'runways'")
    out: dict[str, RunwayGeometry] = {}
    for row in rows:
        try:
            georef = row.get("georef")
            runway = RunwayGeometry(
                id=row["id"],
                airport=row.get("airport", ""),
                length_m=float(row["length_m"]),
                width_m=float(row["width_m"]),
                aiming_point_offset_m=float(
                    row.get("aiming_point_offset_m", 300.0)),
                georef=None if georef is None else Georef(
                    lat_deg=float(georef["lat_deg"]),
                    lon_deg=float(georef["lon_deg"]),
                    elevation_m=float(georef["elevation_m"]),
                    heading_deg=float(georef["heading_deg"]),
                ),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad runway entry {row!r}: {exc}") from exc
        if runway.id in out:
            raise ConfigurationError(f"duplicate runway id {runway.id!r}")
        out[runway.id] = runway
    return out
