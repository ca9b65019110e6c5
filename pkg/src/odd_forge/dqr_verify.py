"""Data quality requirement checks over labeled landing datasets.

Four requirements are evaluated: source suitability (advisory comparison
of synthetic against real footage), completeness (coverage of the ODD
cone and airport variety), representativeness (train/test distribution
divergence plus operating bands), and label accuracy (reprojection and
structural consistency).  Each produces a DqrResult; run_all bundles them
into a DqrReport ready for JSON emission.

Divergences are Jensen-Shannon in natural log, so values live in
[0, ln 2] and a threshold like 0.1 is comparable across features.
"""

from __future__ import annotations

import datetime as _dt
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import geometry
from .dataset_io import REAL, SYNTHETIC, DatasetRecord, DatasetSplit
from .errors import ConfigurationError, InvalidInputError, NotApplicableError
from .odd_spec import CONE_PARAMETERS, ApproachCone, OddSpec
from .geometry import CameraModel, RunwayGeometry

SUITABILITY = "suitability"
COMPLETENESS = "completeness"
REPRESENTATIVENESS = "representativeness"
ACCURACY = "accuracy"

PASS = "pass"
FAIL = "fail"
ADVISORY = "advisory"


def jensen_shannon(p: Sequence[float], q: Sequence[float]) -> float:
    """Jensen-Shannon divergence between two histograms, in nats.

    Inputs are non-negative weights (counts are fine); each side is
    normalized independently.  Zero bins are allowed and contribute
    nothing, so no smoothing is applied.  The result is symmetric and
    bounded by ln 2, reached by distributions with disjoint support.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise InvalidInputError("histograms must be 1-d and equal length")
    if np.any(p < 0) or np.any(q < 0) or not (np.all(np.isfinite(p))
                                              and np.all(np.isfinite(q))):
        raise InvalidInputError("histogram weights must be finite and >= 0")
    p_sum, q_sum = p.sum(), q.sum()
    if p_sum == 0 or q_sum == 0:
        raise InvalidInputError("histogram with zero total weight")
    p = p / p_sum
    q = q / q_sum
    m = 0.5 * (p + q)

    def half_kl(a: np.ndarray) -> float:
        mask = a > 0
        return float(np.sum(a[mask] * np.log(a[mask] / m[mask])))

    return max(0.0, 0.5 * half_kl(p) + 0.5 * half_kl(q))


@dataclass(frozen=True)
class HistogramSpec:
    """Binning recipe for one feature."""

    feature: str
    bins: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.bins < 2:
            raise ValueError("bins must be >= 2")
        if not self.hi > self.lo:
            raise ValueError("need hi > lo")

    def edges(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.bins + 1)


@dataclass(frozen=True)
class VerifyConfig:
    """Thresholds and knobs for the verification run.

    ``attitude_coverage_min`` is reported but only gates the verdict when
    set; the default gate covers the positional cone, airport variety,
    divergence, bands, range coverage, and reprojection error.
    """

    divergence_max: float = 0.1
    cone_coverage_min: float = 0.95
    attitude_coverage_min: float | None = None
    position_grid: tuple[int, int, int] = (8, 4, 4)
    attitude_grid: tuple[int, int, int] = (8, 4, 4)
    min_per_cell: int = 1
    min_airports: int = 10
    aspect_band: tuple[float, float] = (0.5, 1.5)
    aspect_band_floor: float = 0.80
    fill_band: tuple[float, float] = (0.20, 0.80)
    fill_band_floor: float = 0.80
    area_min_px2: float = 625.0
    area_floor: float = 0.95
    reproj_tol_px: float = 0.5
    range_coverage_min: float = 0.9
    hist_bins: int = 20
    per_airport: bool = False
    threads: int | None = None

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out

    @classmethod
    def from_dict(cls, obj: Mapping) -> "VerifyConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise ConfigurationError(f"unknown threshold keys: {unknown}")
        kwargs = dict(obj)
        for key in ("position_grid", "attitude_grid", "aspect_band",
                    "fill_band"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigurationError(f"bad threshold config: {exc}") from exc


@dataclass(frozen=True)
class MetricCheck:
    """One thresholded metric: value compared against threshold by op."""

    name: str
    value: float
    threshold: float
    op: str  # "<=" or ">="

    @property
    def ok(self) -> bool:
        if not math.isfinite(self.value):
            return False
        if self.op == "<=":
            return self.value <= self.threshold
        if self.op == ">=":
            return self.value >= self.threshold
        raise ValueError(f"unknown op {self.op!r}")

    def to_dict(self) -> dict:
        return {"name": self.name, "value": _scrub(self.value),
                "threshold": self.threshold, "op": self.op, "ok": self.ok}


@dataclass(frozen=True)
class DqrResult:
    """Outcome of one requirement check.

    The verdict is pass exactly when every thresholded metric satisfies
    its threshold; advisory results never gate anything.
    """

    requirement: str
    verdict: str
    metrics: dict[str, float] = field(default_factory=dict)
    thresholds: dict[str, float] = field(default_factory=dict)
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "requirement": self.requirement,
            "verdict": self.verdict,
            "metrics": {k: _scrub(v) for k, v in self.metrics.items()},
            "thresholds": dict(self.thresholds),
            "evidence": _scrub(self.evidence),
        }


@dataclass(frozen=True)
class DqrReport:
    """Full compliance report for one dataset against one ODD version."""

    odd_version: int
    results: tuple[DqrResult, ...]
    split_sizes: dict[str, int]
    config: dict
    created: str

    @property
    def passed(self) -> bool:
        return all(r.verdict == PASS for r in self.results
                   if r.verdict != ADVISORY)

    def result(self, requirement: str) -> DqrResult:
        for r in self.results:
            if r.requirement == requirement:
                return r
        raise KeyError(requirement)

    def to_dict(self) -> dict:
        return {
            "odd_version": self.odd_version,
            "passed": self.passed,
            "results": [r.to_dict() for r in self.results],
            "split_sizes": dict(self.split_sizes),
            "config": _scrub(self.config),
            "created": self.created,
        }


def _scrub(value):
    """Make a value JSON-safe: non-finite floats become None."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _scrub(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_scrub(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return _scrub(float(value))
    return value


def _result_from_checks(requirement: str, checks: Sequence[MetricCheck],
                        extra_metrics: Mapping[str, float],
                        evidence: dict) -> DqrResult:
    metrics = {c.name: c.value for c in checks}
    metrics.update(extra_metrics)
    thresholds = {c.name: c.threshold for c in checks}
    evidence = dict(evidence)
    evidence["checks"] = [c.to_dict() for c in checks]
    verdict = PASS if all(c.ok for c in checks) else FAIL
    return DqrResult(requirement, verdict, metrics, thresholds, evidence)


# --- feature extraction ----------------------------------------------------

def _finite_corners(record: DatasetRecord) -> np.ndarray | None:
    corners = np.asarray(record.label.corners, dtype=float)
    if corners.shape != (4, 2) or not np.all(np.isfinite(corners)):
        return None
    return corners


def _feat_center_x(r: DatasetRecord) -> float | None:
    c = _finite_corners(r)
    return None if c is None else float(c[:, 0].mean()) / r.image_size[0]


def _feat_center_y(r: DatasetRecord) -> float | None:
    c = _finite_corners(r)
    return None if c is None else float(c[:, 1].mean()) / r.image_size[1]


def _feat_aspect(r: DatasetRecord) -> float | None:
    bbox = r.label.bbox
    if not all(math.isfinite(v) for v in bbox) or not bbox[2] - bbox[0] > 0:
        return None
    return geometry.aspect_ratio(bbox)


def _feat_fill(r: DatasetRecord) -> float | None:
    c = _finite_corners(r)
    if c is None:
        return None
    try:
        return geometry.fill_ratio(c)
    except geometry.InvalidLabelError:
        return None


def _feat_area(r: DatasetRecord) -> float | None:
    bbox = r.label.bbox
    if not all(math.isfinite(v) for v in bbox):
        return None
    return geometry.bbox_area(bbox)


def _feat_log_area(r: DatasetRecord) -> float | None:
    area = _feat_area(r)
    return math.log10(area) if area and area > 0 else None


def _feat_slant(r: DatasetRecord) -> float | None:
    return r.slant_distance_m


def _feat_ttl(r: DatasetRecord) -> float | None:
    return r.time_to_landing_s


def _pose_feature(param: str) -> Callable[[DatasetRecord], float | None]:
    def get(r: DatasetRecord) -> float | None:
        return None if r.pose is None else r.pose.value(param)
    return get


FEATURES: dict[str, Callable[[DatasetRecord], float | None]] = {
    "center_x": _feat_center_x,
    "center_y": _feat_center_y,
    "aspect_ratio": _feat_aspect,
    "fill_ratio": _feat_fill,
    "bbox_area": _feat_area,
    "log10_bbox_area": _feat_log_area,
    "slant_distance": _feat_slant,
    "time_to_landing": _feat_ttl,
    **{param: _pose_feature(param) for param in CONE_PARAMETERS},
}


def feature_values(records: Iterable[DatasetRecord],
                   feature: str) -> np.ndarray:
    """Finite values of one feature across records (undefined ones skipped)."""
    extract = FEATURES[feature]
    values = [v for v in map(extract, records)
              if v is not None and math.isfinite(v)]
    return np.asarray(values, dtype=float)


def default_histogram_specs(cone: ApproachCone,
                            bins: int = 20) -> tuple[HistogramSpec, ...]:
    """Feature binning used for divergence checks.

    Image-plane features get fixed natural ranges; pose features use the
    cone bounds; slant distance is scaled from the cone's far corner.
    """
    bounds = cone.canonical_bounds()
    lat = max(abs(bounds["lateral_path"].lo), abs(bounds["lateral_path"].hi))
    vert = max(abs(bounds["vertical_path"].lo), abs(bounds["vertical_path"].hi))
    max_slant = bounds["along_track"].hi * math.sqrt(
        1.0 + math.tan(math.radians(lat)) ** 2
        + math.tan(math.radians(vert)) ** 2)
    specs = [
        HistogramSpec("center_x", bins, 0.0, 1.0),
        HistogramSpec("center_y", bins, 0.0, 1.0),
        HistogramSpec("aspect_ratio", bins, 0.0, 3.0),
        HistogramSpec("fill_ratio", bins, 0.0, 1.0),
        HistogramSpec("log10_bbox_area", bins, 1.0, 7.0),
        HistogramSpec("slant_distance", bins, 0.0, 1.1 * max_slant),
        HistogramSpec("time_to_landing", bins, 0.0, 600.0),
    ]
    for param in CONE_PARAMETERS:
        iv = bounds[param]
        specs.append(HistogramSpec(param, bins, iv.lo, iv.hi))
    return tuple(specs)


def _worker_count(config: VerifyConfig) -> int:
    if config.threads is not None:
        return max(1, config.threads)
    env = os.environ.get("ODD_FORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigurationError(
                f"ODD_FORGE_THREADS must be an integer, got {env!r}")
    return min(8, os.cpu_count() or 1)


# --- requirement checks ----------------------------------------------------

def check_source_suitability(split: DatasetSplit) -> DqrResult:
    """Advisory comparison of synthetic records against real footage.

    Surfaces image-plane divergences between the sources, including a
    shape-only comparison of slant distance against time to landing
    (each min-max normalized, never rescaled into the other's units).
    No threshold applies; the verdict is always advisory.
    """
    synth = [r for r in split.records if r.source == SYNTHETIC]
    real = [r for r in split.records if r.source == REAL]
    evidence: dict = {"synthetic_count": len(synth), "real_count": len(real)}
    metrics: dict[str, float] = {}
    if not synth or not real:
        evidence["note"] = ("missing synthetic or real records; nothing to "
                            "compare")
        return DqrResult(SUITABILITY, ADVISORY, metrics, {}, evidence)

    shared = (("center_x", 0.0, 1.0), ("center_y", 0.0, 1.0),
              ("aspect_ratio", 0.0, 3.0), ("fill_ratio", 0.0, 1.0))
    divergences: dict[str, float | None] = {}
    for feature, lo, hi in shared:
        sv = feature_values(synth, feature)
        rv = feature_values(real, feature)
        if len(sv) == 0 or len(rv) == 0:
            divergences[feature] = None
            continue
        hs, _ = np.histogram(sv, bins=20, range=(lo, hi))
        hr, _ = np.histogram(rv, bins=20, range=(lo, hi))
        if hs.sum() == 0 or hr.sum() == 0:
            divergences[feature] = None
            continue
        jsd = jensen_shannon(hs, hr)
        divergences[feature] = jsd
        metrics[f"jsd_{feature}"] = jsd

    slant = feature_values(synth, "slant_distance")
    ttl = feature_values(real, "time_to_landing")
    slant_span = float(np.ptp(slant)) if len(slant) else 0.0
    ttl_span = float(np.ptp(ttl)) if len(ttl) else 0.0
    if len(slant) >= 2 and len(ttl) >= 2 and slant_span > 0 and ttl_span > 0:
        hs, _ = np.histogram((slant - slant.min()) / slant_span,
                             bins=20, range=(0.0, 1.0))
        hr, _ = np.histogram((ttl - ttl.min()) / ttl_span,
                             bins=20, range=(0.0, 1.0))
        jsd = jensen_shannon(hs, hr)
        divergences["distance_shape"] = jsd
        metrics["jsd_distance_shape"] = jsd
        evidence["distance_shape_note"] = (
            "slant distance vs time to landing, min-max normalized; "
            "shape comparison only")
    evidence["divergences"] = divergences
    return DqrResult(SUITABILITY, ADVISORY, metrics, {}, evidence)


def _grid_coverage(values: np.ndarray, bounds, grid: Sequence[int],
                   min_per_cell: int) -> tuple[float, int, int, list]:
    """Coverage of a product grid by sample points, plus empty-cell list."""
    grid = tuple(int(g) for g in grid)
    total = int(np.prod(grid))
    if len(values) == 0:
        return 0.0, 0, total, []
    idx = np.empty_like(values, dtype=int)
    in_range = np.ones(len(values), dtype=bool)
    for axis, (iv, cells) in enumerate(zip(bounds, grid)):
        axis_vals = values[:, axis]
        in_range &= (axis_vals >= iv.lo) & (axis_vals <= iv.hi)
        scaled = (axis_vals - iv.lo) / iv.width * cells
        idx[:, axis] = np.clip(np.floor(scaled), 0, cells - 1)
    idx = idx[in_range]
    if len(idx) == 0:
        return 0.0, 0, total, []
    flat = np.ravel_multi_index(idx.T, grid)
    counts = np.bincount(flat, minlength=total)
    occupied = int(np.sum(counts >= min_per_cell))
    empty = [list(np.unravel_index(i, grid))
             for i in np.flatnonzero(counts < min_per_cell)[:20]]
    return occupied / total, occupied, total, empty


def check_completeness(split: DatasetSplit, cone: ApproachCone,
                       config: VerifyConfig) -> DqrResult:
    """Coverage of the approach cone and airport variety for one split.

    Position coverage grids (along_track, lateral, vertical); attitude
    coverage grids (yaw, pitch, roll) and is informational unless a
    threshold is configured.  An empty split scores zero coverage; a
    split with records but no poses cannot be assessed at all.
    """
    records = split.records
    bounds = cone.canonical_bounds()
    airports = sorted({r.airport for r in records if r.airport})
    evidence: dict = {"split": split.name, "airports": airports}

    if records:
        poses = [r.pose for r in records if r.pose is not None]
        if not poses:
            raise NotApplicableError(
                f"split {split.name!r} has no pose-bearing records")
        pos = np.array([[p.along_track_m, p.lateral_path_deg,
                         p.vertical_path_deg] for p in poses])
        att = np.array([[p.yaw_deg, p.pitch_deg, p.roll_deg] for p in poses])
    else:
        pos = np.empty((0, 3))
        att = np.empty((0, 3))

    pos_bounds = (bounds["along_track"], bounds["lateral_path"],
                  bounds["vertical_path"])
    att_bounds = (bounds["yaw"], bounds["pitch"], bounds["roll"])
    cone_cov, occ_p, tot_p, empty_p = _grid_coverage(
        pos, pos_bounds, config.position_grid, config.min_per_cell)
    att_cov, occ_a, tot_a, empty_a = _grid_coverage(
        att, att_bounds, config.attitude_grid, config.min_per_cell)

    evidence["position_cells"] = {"occupied": occ_p, "total": tot_p,
                                  "grid": list(config.position_grid),
                                  "empty_sample": empty_p}
    evidence["attitude_cells"] = {"occupied": occ_a, "total": tot_a,
                                  "grid": list(config.attitude_grid),
                                  "empty_sample": empty_a}

    checks = [
        MetricCheck("cone_coverage", cone_cov,
                    config.cone_coverage_min, ">="),
        MetricCheck("airport_count", float(len(airports)),
                    float(config.min_airports), ">="),
    ]
    extra = {"attitude_coverage": att_cov}
    if config.attitude_coverage_min is not None:
        checks.append(MetricCheck("attitude_coverage", att_cov,
                                  config.attitude_coverage_min, ">="))
        extra = {}
    return _result_from_checks(COMPLETENESS, checks, extra, evidence)


def _band_fraction(values: np.ndarray, lo: float,
                   hi: float | None) -> tuple[float, int, int]:
    if len(values) == 0:
        return math.nan, 0, 0
    if hi is None:
        inside = values >= lo
    else:
        inside = (values >= lo) & (values <= hi)
    return float(inside.mean()), int(inside.sum()), len(values)


def check_representativeness(train: DatasetSplit, test: DatasetSplit,
                             specs: Sequence[HistogramSpec],
                             config: VerifyConfig) -> DqrResult:
    """Train/test distribution agreement plus operating-band floors.

    Per feature, both splits are histogrammed on a shared binning and the
    Jensen-Shannon divergence must stay at or below the configured
    maximum.  Band rules keep enough mass in the regimes a detector can
    learn from (near-square aspect, moderate fill, non-tiny boxes), and
    test poses must sweep most of each cone parameter's range.
    """
    if len(train) == 0 or len(test) == 0:
        raise NotApplicableError("representativeness needs non-empty train "
                                 "and test splits")
    checks: list[MetricCheck] = []
    extra_metrics: dict[str, float] = {}
    feature_evidence: dict[str, dict] = {}

    def one_feature(spec: HistogramSpec) -> tuple[str, dict, float | None]:
        tv = feature_values(train.records, spec.feature)
        sv = feature_values(test.records, spec.feature)
        entry: dict = {"bins": spec.bins, "lo": spec.lo, "hi": spec.hi,
                       "train_defined": len(tv), "test_defined": len(sv)}
        if len(tv) == 0 or len(sv) == 0:
            entry["skipped"] = "feature undefined in one or both splits"
            return spec.feature, entry, None
        h_train, edges = np.histogram(tv, bins=spec.bins,
                                      range=(spec.lo, spec.hi))
        h_test, _ = np.histogram(sv, bins=spec.bins, range=(spec.lo, spec.hi))
        entry["bin_edges"] = edges.tolist()
        entry["train_counts"] = h_train.tolist()
        entry["test_counts"] = h_test.tolist()
        entry["train_in_range"] = int(h_train.sum())
        entry["test_in_range"] = int(h_test.sum())
        if h_train.sum() == 0 or h_test.sum() == 0:
            entry["skipped"] = "all values fall outside the histogram range"
            return spec.feature, entry, None
        jsd = jensen_shannon(h_train, h_test)
        entry["jsd"] = jsd
        return spec.feature, entry, jsd

    workers = min(_worker_count(config), len(specs)) or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one_feature, specs))
    else:
        outcomes = [one_feature(s) for s in specs]
    for feature, entry, jsd in outcomes:
        feature_evidence[feature] = entry
        if jsd is not None:
            checks.append(MetricCheck(f"jsd_{feature}", jsd,
                                      config.divergence_max, "<="))

    band_evidence: dict[str, dict] = {}
    band_rules = (
        ("aspect_ratio", config.aspect_band[0], config.aspect_band[1],
         config.aspect_band_floor),
        ("fill_ratio", config.fill_band[0], config.fill_band[1],
         config.fill_band_floor),
        ("bbox_area", config.area_min_px2, None, config.area_floor),
    )
    for feature, lo, hi, floor in band_rules:
        for split in (train, test):
            values = feature_values(split.records, feature)
            frac, inside, total = _band_fraction(values, lo, hi)
            key = f"{feature}_band_{split.name}"
            band_evidence[key] = {"lo": lo, "hi": hi, "in_band": inside,
                                  "defined": total}
            if total == 0:
                band_evidence[key]["skipped"] = "feature undefined"
                continue
            checks.append(MetricCheck(key, frac, floor, ">="))

    # Range coverage is recorded for the report but does not gate the
    # verdict; the pass condition is divergences plus band floors.
    range_evidence: dict[str, dict] = {}
    test_poses = [r.pose for r in test.records if r.pose is not None]
    for spec in specs:
        if spec.feature not in CONE_PARAMETERS:
            continue
        values = np.array([p.value(spec.feature) for p in test_poses])
        if len(values) < 2:
            range_evidence[spec.feature] = {"skipped": "fewer than two poses"}
            continue
        spread = float(values.max() - values.min())
        coverage = spread / (spec.hi - spec.lo)
        range_evidence[spec.feature] = {
            "spread": spread, "range": spec.hi - spec.lo,
            "coverage": coverage,
            "meets_target": coverage >= config.range_coverage_min}
        extra_metrics[f"range_coverage_{spec.feature}"] = coverage

    evidence = {"features": feature_evidence, "bands": band_evidence,
                "test_range_coverage": range_evidence,
                "train_size": len(train), "test_size": len(test)}

    if config.per_airport:
        per_airport: dict[str, dict[str, float]] = {}
        airports = sorted({r.airport for r in train.records}
                          & {r.airport for r in test.records})
        for airport in airports:
            tr = [r for r in train.records if r.airport == airport]
            te = [r for r in test.records if r.airport == airport]
            if len(tr) < 30 or len(te) < 30:
                continue
            entry = {}
            for spec in specs:
                if spec.feature not in ("center_x", "center_y",
                                        "aspect_ratio", "fill_ratio"):
                    continue
                tv = feature_values(tr, spec.feature)
                sv = feature_values(te, spec.feature)
                if len(tv) == 0 or len(sv) == 0:
                    continue
                ht, _ = np.histogram(tv, bins=spec.bins,
                                     range=(spec.lo, spec.hi))
                hs, _ = np.histogram(sv, bins=spec.bins,
                                     range=(spec.lo, spec.hi))
                if ht.sum() and hs.sum():
                    entry[spec.feature] = jensen_shannon(ht, hs)
            if entry:
                per_airport[airport] = entry
        evidence["per_airport"] = per_airport

    if checks:
        extra_metrics["max_jsd"] = max(
            (c.value for c in checks if c.name.startswith("jsd_")),
            default=math.nan)
    return _result_from_checks(REPRESENTATIVENESS, checks, extra_metrics,
                               evidence)


def check_accuracy(split: DatasetSplit, camera: CameraModel,
                   runway_db: Mapping[str, RunwayGeometry],
                   config: VerifyConfig) -> DqrResult:
    """Label accuracy: reprojection of synthetic poses plus structure.

    Synthetic records with a known runway are re-projected through the
    camera model; the per-record error is the largest corner distance.
    Structural rules apply to every record with finite corners: the near
    edge must sit below the far edge in the image, fully visible corners
    must stay inside the crop band and inside the stored bbox.
    """
    if len(split) == 0:
        raise NotApplicableError("accuracy needs at least one record")
    errors: list[float] = []
    structural = 0
    unverifiable = 0
    notes: list[str] = []
    v_lo, v_hi = camera.visible_v_range

    for record in split.records:
        corners = _finite_corners(record)
        if record.source == SYNTHETIC and record.pose is not None:
            runway = runway_db.get(record.runway)
            if runway is None:
                unverifiable += 1
                if len(notes) < 10:
                    notes.append(f"{record.image_id}: runway "
                                 f"{record.runway!r} not in db")
            else:
                expected = geometry.project_runway(
                    record.pose, runway, camera,
                    margin_px=record.label.margin_px)
                exp = np.asarray(expected.corners, dtype=float)
                got = np.asarray(record.label.corners, dtype=float)
                finite_exp = np.all(np.isfinite(exp), axis=1)
                finite_got = np.all(np.isfinite(got), axis=1)
                if not np.array_equal(finite_exp, finite_got) or (
                        expected.fully_visible != record.label.fully_visible):
                    structural += 1
                    if len(notes) < 10:
                        notes.append(f"{record.image_id}: visibility or "
                                     "projectability mismatch")
                elif np.any(finite_exp):
                    delta = np.linalg.norm(exp[finite_exp] - got[finite_exp],
                                           axis=1)
                    worst = float(delta.max())
                    errors.append(worst)
                    if worst > config.reproj_tol_px and len(notes) < 10:
                        notes.append(f"{record.image_id}: reprojection "
                                     f"error {worst:.3f} px")
        if corners is None:
            structural += 1
            if len(notes) < 10:
                notes.append(f"{record.image_id}: non-projectable corners")
            continue
        u, v = corners[:, 0], corners[:, 1]
        problems = []
        if not v[:2].mean() > v[2:].mean():
            problems.append("near edge not below far edge")
        if not np.all((u >= 0) & (u <= camera.width_px)
                      & (v >= 0) & (v <= camera.height_px)):
            problems.append("corners outside the image")
        bbox = record.label.bbox
        if not (all(math.isfinite(b) for b in bbox) and np.all(
                (u >= bbox[0] - 1e-6) & (u <= bbox[2] + 1e-6)
                & (v >= bbox[1] - 1e-6) & (v <= bbox[3] + 1e-6))):
            problems.append("bbox does not contain the corners")
        if record.label.fully_visible and not np.all((v >= v_lo)
                                                     & (v <= v_hi)):
            problems.append("fully visible corners escape the crop band")
        if problems:
            structural += 1
            if len(notes) < 10:
                notes.append(f"{record.image_id}: {'; '.join(problems)}")

    checks = [MetricCheck("structural_violations", float(structural),
                          0.0, "<=")]
    extra = {"records_checked": float(len(split)),
             "records_unverifiable": float(unverifiable),
             "reprojected": float(len(errors))}
    if errors:
        arr = np.asarray(errors)
        checks.append(MetricCheck("reproj_mean_px", float(arr.mean()),
                                  config.reproj_tol_px, "<="))
        extra["reproj_max_px"] = float(arr.max())
        extra["reproj_p95_px"] = float(np.percentile(arr, 95))
    evidence = {"split": split.name, "notes": notes,
                "real_records_note": "real records get structural checks "
                                     "only; no pose to reproject"}
    return _result_from_checks(ACCURACY, checks, extra, evidence)


def _merged_completeness(splits: Mapping[str, DatasetSplit],
                         cone: ApproachCone,
                         config: VerifyConfig) -> DqrResult:
    """Completeness over train and test, combined into one result."""
    metrics: dict[str, float] = {}
    thresholds: dict[str, float] = {}
    evidence: dict = {}
    verdicts: list[str] = []
    for name in ("train", "test"):
        split = splits.get(name)
        if split is None:
            continue
        try:
            result = check_completeness(split, cone, config)
        except NotApplicableError as exc:
            evidence[name] = {"not_applicable": str(exc)}
            verdicts.append(FAIL)
            continue
        for key, value in result.metrics.items():
            metrics[f"{name}_{key}"] = value
        for key, value in result.thresholds.items():
            thresholds[f"{name}_{key}"] = value
        evidence[name] = result.evidence
        verdicts.append(result.verdict)
    if not verdicts:
        return DqrResult(COMPLETENESS, FAIL, {}, {},
                         {"not_applicable": "no train or test split given"})
    verdict = PASS if all(v == PASS for v in verdicts) else FAIL
    return DqrResult(COMPLETENESS, verdict, metrics, thresholds, evidence)


def run_all(splits: Mapping[str, DatasetSplit], spec: OddSpec,
            config: VerifyConfig, camera: CameraModel,
            runway_db: Mapping[str, RunwayGeometry]) -> DqrReport:
    """Evaluate every requirement and assemble the report.

    A check that cannot run (empty split, no poses) contributes an
    explicit not-applicable failure instead of crashing the run.
    """
    all_records: list[DatasetRecord] = []
    for split in splits.values():
        all_records.extend(split.records)
    everything = DatasetSplit("all", tuple(all_records))

    results: list[DqrResult] = []
    results.append(check_source_suitability(everything))
    results.append(_merged_completeness(splits, spec.cone, config))

    train = splits.get("train", DatasetSplit("train", ()))
    test = splits.get("test", DatasetSplit("test", ()))
    specs = default_histogram_specs(spec.cone, bins=config.hist_bins)
    try:
        results.append(check_representativeness(train, test, specs, config))
    except NotApplicableError as exc:
        results.append(DqrResult(REPRESENTATIVENESS, FAIL, {}, {},
                                 {"not_applicable": str(exc)}))
    try:
        results.append(check_accuracy(everything, camera, runway_db, config))
    except NotApplicableError as exc:
        results.append(DqrResult(ACCURACY, FAIL, {}, {},
                                 {"not_applicable": str(exc)}))

    created = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return DqrReport(
        odd_version=spec.version,
        results=tuple(results),
        split_sizes={name: len(split) for name, split in splits.items()},
        config=config.to_dict(),
        created=created,
    )


def write_report(report: DqrReport, path: str | Path) -> None:
    """Write the report JSON (sorted keys, so diffs are stable)."""
    import json

    Path(path).write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")


def write_histograms(report: DqrReport, directory: str | Path) -> list[Path]:
    """Export one CSV per histogrammed feature from the report evidence.

    Columns: feature,bin_low,bin_high,train_count,test_count.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    try:
        rep = report.result(REPRESENTATIVENESS)
    except KeyError:
        return []
    features = rep.evidence.get("features", {})
    written: list[Path] = []
    for feature in sorted(features):
        entry = features[feature]
        if "bin_edges" not in entry:
            continue
        edges = entry["bin_edges"]
        train_counts = entry["train_counts"]
        test_counts = entry["test_counts"]
        path = directory / f"{feature}.csv"
        lines = ["feature,bin_low,bin_high,train_count,test_count"]
        for i in range(len(train_counts)):
            lines.append(f"{feature},{edges[i]!r},{edges[i + 1]!r},"
                         f"{train_counts[i]},{test_counts[i]}")
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        written.append(path)
    return written
