"""Figure rendering for verification reports.

Every figure is derived from the same evidence the JSON report carries,
so the plots and the numbers cannot drift apart.  Files are written as
PNG beside the delimited outputs; the Agg backend keeps this headless.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .dataset_io import DatasetSplit  # noqa: E402
from .dqr_verify import (REPRESENTATIVENESS, SUITABILITY, DqrReport,  # noqa: E402
                         feature_values)

_SPLIT_COLORS = {"train": "tab:blue", "test": "tab:orange",
                 "real_subset": "tab:green"}


def _save(fig, path: Path, written: list[Path]) -> None:
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)
    written.append(path)


def _cone_positions_figure(splits: Mapping[str, DatasetSplit],
                           path: Path, written: list[Path]) -> None:
    frames = {}
    for name, split in splits.items():
        poses = [r.pose for r in split.records if r.pose is not None]
        if poses:
            frames[name] = np.array(
                [[p.along_track_m, p.lateral_path_deg, p.vertical_path_deg]
                 for p in poses])
    if not frames:
        return
    fig = plt.figure(figsize=(7, 5))
    ax = fig.add_subplot(projection="3d")
    for name, arr in frames.items():
        step = max(1, len(arr) // 2000)
        sub = arr[::step]
        ax.scatter(sub[:, 0], sub[:, 1], sub[:, 2], s=3, alpha=0.4,
                   label=name, color=_SPLIT_COLORS.get(name))
    ax.set_xlabel("along track [m]")
    ax.set_ylabel("lateral path [deg]")
    ax.set_zlabel("vertical path [deg]")
    ax.set_title("Sampled positions in the approach cone")
    ax.legend(loc="upper left")
    _save(fig, path, written)


def _centers_figure(splits: Mapping[str, DatasetSplit], path: Path,
                    written: list[Path]) -> None:
    fig, ax = plt.subplots(figsize=(6, 5))
    plotted = False
    for name, split in splits.items():
        xs = feature_values(split.records, "center_x")
        ys = feature_values(split.records, "center_y")
        n = min(len(xs), len(ys))
        if n == 0:
            continue
        step = max(1, n // 3000)
        ax.scatter(xs[:n:step], ys[:n:step], s=4, alpha=0.35, label=name,
                   color=_SPLIT_COLORS.get(name))
        plotted = True
    if not plotted:
        plt.close(fig)
        return
    ax.set_xlim(0, 1)
    ax.set_ylim(1, 0)  # image coordinates: v grows downward
    ax.set_xlabel("runway center x (normalized)")
    ax.set_ylabel("runway center y (normalized)")
    ax.set_title("Runway center positions")
    ax.legend(loc="upper right")
    _save(fig, path, written)


def _histogram_figures(report: DqrReport, out_dir: Path,
                       written: list[Path]) -> None:
    try:
        rep = report.result(REPRESENTATIVENESS)
    except KeyError:
        return
    features = rep.evidence.get("features", {})
    for feature in sorted(features):
        entry = features[feature]
        if "bin_edges" not in entry:
            continue
        edges = np.asarray(entry["bin_edges"])
        centers = 0.5 * (edges[:-1] + edges[1:])
        width = (edges[1] - edges[0]) * 0.42
        fig, ax = plt.subplots(figsize=(6, 4))
        train = np.asarray(entry["train_counts"], dtype=float)
        test = np.asarray(entry["test_counts"], dtype=float)
        for counts, offset, name in ((train, -width / 2, "train"),
                                     (test, width / 2, "test")):
            total = counts.sum()
            if total > 0:
                counts = counts / total
            ax.bar(centers + offset, counts, width=width, label=name,
                   color=_SPLIT_COLORS[name], alpha=0.8)
        jsd = entry.get("jsd")
        title = feature if jsd is None else f"{feature} (JSD {jsd:.4f})"
        ax.set_title(title)
        ax.set_xlabel(feature)
        ax.set_ylabel("fraction of split")
        ax.legend()
        _save(fig, out_dir / f"hist_{feature}.png", written)


def _distance_shape_figure(report: DqrReport, splits, path: Path,
                           written: list[Path]) -> None:
    try:
        suit = report.result(SUITABILITY)
    except KeyError:
        return
    if "jsd_distance_shape" not in suit.metrics:
        return
    records = [r for split in splits.values() for r in split.records]
    slant = feature_values([r for r in records if r.source == "synthetic"],
                           "slant_distance")
    ttl = feature_values([r for r in records if r.source == "real"],
                         "time_to_landing")
    if len(slant) < 2 or len(ttl) < 2:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    for values, name, color in ((slant, "slant distance (synthetic)",
                                 "tab:blue"),
                                (ttl, "time to landing (real)",
                                 "tab:green")):
        span = float(np.ptp(values))
        if span == 0:
            continue
        normalized = (values - values.min()) / span
        counts, edges = np.histogram(normalized, bins=20, range=(0, 1))
        centers = 0.5 * (edges[:-1] + edges[1:])
        ax.plot(centers, counts / counts.sum(), marker="o", markersize=3,
                label=name, color=color)
    ax.set_xlabel("min-max normalized value")
    ax.set_ylabel("fraction")
    ax.set_title(
        f"Distance shape comparison "
        f"(JSD {suit.metrics['jsd_distance_shape']:.4f})")
    ax.legend()
    _save(fig, path, written)


def _airport_figure(splits: Mapping[str, DatasetSplit], path: Path,
                    written: list[Path]) -> None:
    names = sorted(splits)
    airports = sorted({r.airport for s in splits.values()
                       for r in s.records if r.airport})
    if not airports:
        return
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(airports)), 4))
    x = np.arange(len(airports))
    width = 0.8 / len(names)
    for i, name in enumerate(names):
        counts = [sum(1 for r in splits[name].records if r.airport == a)
                  for a in airports]
        ax.bar(x + (i - (len(names) - 1) / 2) * width, counts, width=width,
               label=name, color=_SPLIT_COLORS.get(name))
    ax.set_xticks(x)
    ax.set_xticklabels(airports, rotation=45, ha="right")
    ax.set_ylabel("records")
    ax.set_title("Records per airport")
    ax.legend()
    _save(fig, path, written)


def render_report_figures(report: DqrReport,
                          splits: Mapping[str, DatasetSplit],
                          out_dir: str | Path) -> list[Path]:
    """Render all report figures into ``out_dir``; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    _cone_positions_figure(splits, out_dir / "cone_positions.png", written)
    _centers_figure(splits, out_dir / "runway_centers.png", written)
    _histogram_figures(report, out_dir, written)
    _distance_shape_figure(report, splits, out_dir / "distance_shape.png",
                           written)
    _airport_figure(splits, out_dir / "airports.png", written)
    return written
