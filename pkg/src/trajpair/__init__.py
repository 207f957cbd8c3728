"""Pair driving-log trajectories across two recording domains by spatial
coverage, with tiered automatic selection and a human review loop."""

from .config import RunConfig, load_config
from .coverage import (
    CoverageTable,
    GridIndex,
    LateralThresholds,
    cover,
    coverage_table,
    d_max,
)
from .endpoint import PairedSubsequence, align_endpoints, build_pair, select_sampling
from .geo import GeoFrame, PlanarPoint, project_to_local
from .matcher import (
    MatchOutcome,
    apply_decision,
    best_clear,
    candidate_set,
    consistency,
    tiered_select,
)
from .spatial import SpatialModel, TemporalTrajectory, interpolate_constant_distance
from .splits import LabelPlan, fractional_split, mix_splits, sparse_plan
from .stats import classify_motion, distribution_report, ks_statistic, track_speed

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "load_config",
    "CoverageTable",
    "GridIndex",
    "LateralThresholds",
    "cover",
    "coverage_table",
    "d_max",
    "PairedSubsequence",
    "align_endpoints",
    "build_pair",
    "select_sampling",
    "GeoFrame",
    "PlanarPoint",
    "project_to_local",
    "MatchOutcome",
    "apply_decision",
    "best_clear",
    "candidate_set",
    "consistency",
    "tiered_select",
    "SpatialModel",
    "TemporalTrajectory",
    "interpolate_constant_distance",
    "LabelPlan",
    "fractional_split",
    "mix_splits",
    "sparse_plan",
    "classify_motion",
    "distribution_report",
    "ks_statistic",
    "track_speed",
    "__version__",
]
