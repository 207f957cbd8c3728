"""Distribution statistics over paired-domain annotations.

Compares the two domains through per-category instance counts and
empirical CDFs of points per box, objects per frame, and average track
speed, with a two-sample Kolmogorov-Smirnov statistic as the scalar gap
summary for each curve pair.  Track speed is the unweighted mean of
per-step planar speeds of a box center; a 0.2 m/s threshold splits
stationary from dynamic objects.

Pure aggregation; merges associatively across workers.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

MOTION_STATIONARY = "stationary"
MOTION_DYNAMIC = "dynamic"

DEFAULT_SPEED_THRESHOLD = 0.2


@dataclass(frozen=True)
class AnnotationRecord:
    """One 3D box annotation; (sequence_id, frame_index, object_id) is unique."""

    sequence_id: str
    frame_index: int
    object_id: str
    category: str
    x: float
    y: float
    z: float
    point_count: int
    timestamp: float

    def __post_init__(self):
        if self.point_count < 0:
            raise InvalidInputError(
                f"{self.sequence_id}/{self.object_id}: point_count must be >= 0"
            )


@dataclass(frozen=True, eq=False)
class EcdfCurve:
    """Right-continuous empirical CDF: fraction of samples <= x."""

    values: np.ndarray  # sorted ascending
    fractions: np.ndarray  # k/n for k = 1..n

    @classmethod
    def from_samples(cls, samples) -> "EcdfCurve":
        arr = np.sort(np.asarray(list(samples), dtype=np.float64))
        if arr.size == 0:
            raise InvalidInputError("cannot build an ECDF from zero samples")
        return cls(arr, np.arange(1, arr.size + 1, dtype=np.float64) / arr.size)

    def evaluate(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side="right") / self.values.size)

    def __len__(self) -> int:
        return int(self.values.size)


def ks_statistic(a, b) -> float:
    """Two-sample KS statistic: max vertical gap between the two ECDFs."""
    a = np.sort(np.asarray(list(a), dtype=np.float64))
    b = np.sort(np.asarray(list(b), dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise InvalidInputError("KS statistic requires non-empty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.abs(fa - fb).max())


def track_speed(records: list[AnnotationRecord]) -> float | None:
    """Mean planar speed of one object's box center along its track.

    Records are ordered by timestamp; steps with no time elapsed are
    skipped.  Returns None when fewer than two distinct-time records
    exist (the track's speed is undefined).
    """
    ordered = sorted(records, key=lambda r: r.timestamp)
    speeds = []
    for prev, cur in zip(ordered, ordered[1:]):
        dt = cur.timestamp - prev.timestamp
        if dt <= 0:
            continue
        dx = cur.x - prev.x
        dy = cur.y - prev.y
        speeds.append(float(np.sqrt(dx * dx + dy * dy)) / dt)
    if not speeds:
        return None
    return float(np.mean(speeds))


def classify_motion(speed: float, threshold: float = DEFAULT_SPEED_THRESHOLD) -> str:
    """Stationary strictly below the threshold, dynamic at or above it."""
    if speed < 0:
        raise InvalidInputError(f"speed must be >= 0, got {speed}")
    return MOTION_STATIONARY if speed < threshold else MOTION_DYNAMIC


@dataclass(frozen=True, eq=False)
class DomainStats:
    category_counts: dict[str, int]  # unique object instances per category
    point_count_ecdf: EcdfCurve
    objects_per_frame_ecdf: EcdfCurve
    speed_ecdf: EcdfCurve | None
    stationary: int
    dynamic: int
    undefined_tracks: int


@dataclass(frozen=True, eq=False)
class DistributionReport:
    snowy: DomainStats
    clear: DomainStats
    ks: dict[str, float | None]  # point_count, objects_per_frame, track_speed


def group_tracks(records: list[AnnotationRecord]) -> dict[tuple[str, str], list[AnnotationRecord]]:
    """Gather all boxes sharing an object id within one sequence."""
    tracks: dict[tuple[str, str], list[AnnotationRecord]] = defaultdict(list)
    for rec in records:
        tracks[(rec.sequence_id, rec.object_id)].append(rec)
    return dict(tracks)


def domain_stats(
    records: list[AnnotationRecord], speed_threshold: float = DEFAULT_SPEED_THRESHOLD
) -> DomainStats:
    if not records:
        raise InvalidInputError("domain statistics require at least one annotation")
    tracks = group_tracks(records)

    categories: dict[str, int] = defaultdict(int)
    for track in tracks.values():
        first = min(track, key=lambda r: r.timestamp)
        categories[first.category] += 1

    per_frame: dict[tuple[str, int], int] = defaultdict(int)
    for rec in records:
        per_frame[(rec.sequence_id, rec.frame_index)] += 1

    speeds = []
    undefined = stationary = dynamic = 0
    for track in tracks.values():
        speed = track_speed(track)
        if speed is None:
            undefined += 1
            continue
        speeds.append(speed)
        if classify_motion(speed, speed_threshold) == MOTION_STATIONARY:
            stationary += 1
        else:
            dynamic += 1

    return DomainStats(
        category_counts=dict(sorted(categories.items())),
        point_count_ecdf=EcdfCurve.from_samples(r.point_count for r in records),
        objects_per_frame_ecdf=EcdfCurve.from_samples(per_frame.values()),
        speed_ecdf=EcdfCurve.from_samples(speeds) if speeds else None,
        stationary=stationary,
        dynamic=dynamic,
        undefined_tracks=undefined,
    )


def distribution_report(
    snowy_records: list[AnnotationRecord],
    clear_records: list[AnnotationRecord],
    *,
    speed_threshold: float = DEFAULT_SPEED_THRESHOLD,
) -> DistributionReport:
    """Per-domain statistics plus KS gap summaries between the domains."""
    snowy = domain_stats(snowy_records, speed_threshold)
    clear = domain_stats(clear_records, speed_threshold)
    ks = {
        "point_count": ks_statistic(
            [r.point_count for r in snowy_records], [r.point_count for r in clear_records]
        ),
        "objects_per_frame": ks_statistic(
            snowy.objects_per_frame_ecdf.values, clear.objects_per_frame_ecdf.values
        ),
        "track_speed": (
            ks_statistic(snowy.speed_ecdf.values, clear.speed_ecdf.values)
            if snowy.speed_ecdf is not None and clear.speed_ecdf is not None
            else None
        ),
    }
    return DistributionReport(snowy=snowy, clear=clear, ks=ks)
