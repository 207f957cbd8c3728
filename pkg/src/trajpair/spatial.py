"""Constant-distance spatial models of trajectories.

A recording is uniform in time but not in space: the vehicle speeds up,
slows down, and sometimes stands still.  For spatial comparison we
resample each trajectory's piecewise-linear path into points spaced a
constant arc length apart.  Point j sits at arc length j * delta_d
along the path; the segment that brackets that arc length and the
fractional position alpha inside it are kept for auditing.

Models are immutable after construction and shareable across readers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateModelError, InvalidInputError
from .geo import PlanarPoint

DEFAULT_SPACING_M = 1.0

# Allowed jitter of inter-frame time steps relative to the nominal step.
TIME_STEP_TOLERANCE = 0.1


@dataclass(frozen=True, eq=False)
class TemporalTrajectory:
    """Time-uniform sequence of planar positions for one recording."""

    sequence_id: str
    frame_indices: np.ndarray  # (n,) int
    timestamps: np.ndarray  # (n,) float seconds, strictly increasing
    positions: np.ndarray  # (n, 2) float meters
    delta_t: float

    def __post_init__(self):
        object.__setattr__(self, "frame_indices", np.asarray(self.frame_indices, dtype=np.int64))
        object.__setattr__(self, "timestamps", np.asarray(self.timestamps, dtype=np.float64))
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=np.float64))
        n = len(self.timestamps)
        if n < 2:
            raise InvalidInputError(f"{self.sequence_id}: need at least 2 frames, got {n}")
        if self.positions.shape != (n, 2) or len(self.frame_indices) != n:
            raise InvalidInputError(f"{self.sequence_id}: inconsistent frame array lengths")
        if not np.isfinite(self.positions).all():
            raise InvalidInputError(f"{self.sequence_id}: non-finite position")
        diffs = np.diff(self.timestamps)
        if not (diffs > 0).all():
            bad = int(np.argmax(diffs <= 0)) + 1
            raise InvalidInputError(
                f"{self.sequence_id}: timestamps not strictly increasing at frame {bad}"
            )
        if self.delta_t <= 0:
            raise InvalidInputError(f"{self.sequence_id}: delta_t must be positive")
        jitter = np.abs(diffs - self.delta_t)
        if (jitter > TIME_STEP_TOLERANCE * self.delta_t).any():
            bad = int(np.argmax(jitter > TIME_STEP_TOLERANCE * self.delta_t)) + 1
            raise InvalidInputError(
                f"{self.sequence_id}: time step at frame {bad} deviates more than "
                f"{TIME_STEP_TOLERANCE:.0%} from delta_t={self.delta_t}"
            )

    @classmethod
    def from_frames(
        cls,
        sequence_id: str,
        frames: list[tuple[int, float, PlanarPoint]],
        delta_t: float | None = None,
    ) -> "TemporalTrajectory":
        """Build from (frame_index, timestamp, point) tuples.

        When ``delta_t`` is omitted it is estimated from the span of the
        timestamps, which is exact for jitter-free recordings.
        """
        if len(frames) < 2:
            raise InvalidInputError(f"{sequence_id}: need at least 2 frames")
        idx = [f[0] for f in frames]
        ts = [f[1] for f in frames]
        pos = [(p.x, p.y) for _, _, p in frames]
        if delta_t is None:
            delta_t = (ts[-1] - ts[0]) / (len(ts) - 1)
        return cls(sequence_id, np.array(idx), np.array(ts), np.array(pos), float(delta_t))

    def __len__(self) -> int:
        return len(self.timestamps)


@dataclass(frozen=True, eq=False)
class SpatialModel:
    """Constant-spacing polyline resampling of a trajectory.

    ``segment_index[j]`` is the positional index i of the trajectory frame
    ending the segment that point j was interpolated on (point j lies
    between frames i-1 and i), and ``alpha[j]`` is the fractional position
    inside that segment.  A model collapsed to a single point (by
    :func:`polyline_model` on a near-stationary path) has one entry with
    segment_index 0 and alpha 0.
    """

    sequence_id: str
    delta_d: float
    points: np.ndarray  # (m, 2) float meters
    segment_index: np.ndarray = field(repr=False)  # (m,) int
    alpha: np.ndarray = field(repr=False)  # (m,) float in [0, 1]

    def __post_init__(self):
        object.__setattr__(self, "points", np.asarray(self.points, dtype=np.float64))
        object.__setattr__(self, "segment_index", np.asarray(self.segment_index, dtype=np.int64))
        object.__setattr__(self, "alpha", np.asarray(self.alpha, dtype=np.float64))

    def __len__(self) -> int:
        return len(self.points)


def _interpolate_polyline(points: np.ndarray, delta_d: float):
    """Core resampling over a raw polyline.

    Returns (points, segment_index, alpha) arrays.  Zero-length segments
    contribute nothing to the arc length and are never selected, so a
    stationary stretch of the path is skipped implicitly.
    """
    points = np.asarray(points, dtype=np.float64)
    seg_vec = np.diff(points, axis=0)
    seg_len = np.sqrt(seg_vec[:, 0] ** 2 + seg_vec[:, 1] ** 2)
    moving = np.nonzero(seg_len > 0.0)[0]
    if moving.size == 0:
        raise DegenerateModelError(0.0)
    lens = seg_len[moving]
    cum = np.cumsum(lens)
    total = float(cum[-1])
    if total < delta_d:
        raise DegenerateModelError(total)

    n_steps = int(total // delta_d)
    # Guard the floor against the quotient rounding up across an integer.
    while n_steps * delta_d > total:
        n_steps -= 1
    targets = np.arange(1, n_steps + 1, dtype=np.float64) * delta_d
    at = np.searchsorted(cum, targets, side="left")
    seg = moving[at]
    prev_cum = np.where(at > 0, cum[np.maximum(at - 1, 0)], 0.0)
    alpha = np.clip((targets - prev_cum) / lens[at], 0.0, 1.0)
    coords = points[seg] + alpha[:, None] * seg_vec[seg]

    out_points = np.vstack([points[0], coords])
    out_seg = np.concatenate([[moving[0]], seg]) + 1  # frame index ending the segment
    out_alpha = np.concatenate([[0.0], alpha])
    return out_points, out_seg, out_alpha


def interpolate_constant_distance(
    traj: TemporalTrajectory, delta_d: float = DEFAULT_SPACING_M
) -> SpatialModel:
    """Resample a trajectory into points a constant ``delta_d`` apart.

    The first model point coincides with the first frame; the model ends
    at the last whole multiple of ``delta_d``, so a final partial segment
    emits no extra point.  Raises :class:`DegenerateModelError` (carrying
    the arc length) when the whole path is shorter than one step.
    """
    if delta_d <= 0:
        raise InvalidInputError(f"delta_d must be positive, got {delta_d}")
    pts, seg, alpha = _interpolate_polyline(traj.positions, delta_d)
    return SpatialModel(traj.sequence_id, float(delta_d), pts, seg, alpha)


def polyline_model(sequence_id: str, points: np.ndarray, delta_d: float) -> SpatialModel:
    """Model over a raw polyline, collapsing to a single point when the
    polyline is shorter than one spacing step."""
    points = np.asarray(points, dtype=np.float64)
    if len(points) == 0:
        raise InvalidInputError(f"{sequence_id}: empty polyline")
    try:
        pts, seg, alpha = _interpolate_polyline(points, delta_d)
    except DegenerateModelError:
        return SpatialModel(
            sequence_id, float(delta_d), points[:1].copy(), np.array([0]), np.array([0.0])
        )
    return SpatialModel(sequence_id, float(delta_d), pts, seg, alpha)
