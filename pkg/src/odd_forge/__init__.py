"""odd-forge: executable landing-approach ODDs, runway label geometry,
and dataset quality verification."""

from .odd_spec import (ApproachCone, ConceptTag, Interval, OddSpec,
                       ParameterSpec, Pose, SampleClassification,
                       classify_sample, contains, load_spec, refine,
                       save_spec, validate_spec)
from .geometry import (CameraModel, CartesianPose, Georef, ImageLabel,
                       RunwayGeometry, aspect_ratio, fill_ratio,
                       project_runway, slant_distance, to_cartesian)
from .sampling import (SamplingConfig, ScenarioKind, Trajectory,
                       generate_trajectory, sample_cone, to_geodetic)
from .dataset_io import (DatasetRecord, DatasetSplit, LoadResult,
                         ensure_disjoint, load_records, load_runway_db,
                         make_synthetic_record, write_labels, write_scenario)
from .dqr_verify import (DqrReport, DqrResult, HistogramSpec, VerifyConfig,
                         jensen_shannon, run_all, write_histograms,
                         write_report)

__version__ = "0.1.0"

__all__ = [
    "ApproachCone", "CameraModel", "CartesianPose", "ConceptTag",
    "DatasetRecord", "DatasetSplit", "DqrReport", "DqrResult", "Georef",
    "HistogramSpec", "ImageLabel", "Interval", "LoadResult", "OddSpec",
    "ParameterSpec", "Pose", "RunwayGeometry", "SampleClassification",
    "SamplingConfig", "ScenarioKind", "Trajectory", "VerifyConfig",
    "aspect_ratio", "classify_sample", "contains", "ensure_disjoint",
    "fill_ratio", "generate_trajectory", "jensen_shannon", "load_records",
    "load_runway_db", "load_spec", "make_synthetic_record", "project_runway",
    "refine", "run_all", "sample_cone", "save_spec", "slant_distance",
    "to_cartesian", "to_geodetic", "validate_spec", "write_histograms",
    "write_labels", "write_report", "write_scenario",
]
