"""Clear subsequence extraction and frame sampling for a matched pair.

The clear frames nearest to the snowy frames demark an aligned window.
The window is sampled at the largest stride (from a small allowed set)
that still yields the minimum frame count; an oversized result bumps the
stride once more and takes exactly the minimum count.  Windows too short
to reach the minimum are widened inside the clear recording, which is
flagged because it grows the distance discrepancy of the pair.

Pure per pair; parallel across pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .config import RunConfig
from .coverage import d_max as directed_d_max
from .errors import InvalidInputError
from .matcher import MatchOutcome
from .spatial import TemporalTrajectory, polyline_model


@dataclass(frozen=True)
class SamplingChoice:
    interval: int
    frame_count: int
    effective_rate: float
    shortfall: bool  # even the smallest stride cannot reach min_frames
    capped: bool  # the oversize rule fired: stride bumped, exactly min_frames


@dataclass(frozen=True)
class PairedSubsequence:
    """Final sampled clear subsequence paired to a snowy sequence."""

    snowy_id: str
    clear_id: str
    clear_frame_indices: tuple[int, ...]
    sampling_interval: int
    effective_rate: float
    d_max: float
    extended_beyond_alignment: bool
    shortfall: bool
    aligned_window: tuple[int, int]

    @property
    def frame_count(self) -> int:
        return len(self.clear_frame_indices)

    def to_jsonable(self) -> dict:
        return {
            "snowy_id": self.snowy_id,
            "clear_id": self.clear_id,
            "clear_frame_indices": list(self.clear_frame_indices),
            "sampling_interval": self.sampling_interval,
            "effective_rate": self.effective_rate,
            "d_max": self.d_max,
            "extended_beyond_alignment": self.extended_beyond_alignment,
            "shortfall": self.shortfall,
            "aligned_window": list(self.aligned_window),
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "PairedSubsequence":
        return cls(
            snowy_id=data["snowy_id"],
            clear_id=data["clear_id"],
            clear_frame_indices=tuple(int(i) for i in data["clear_frame_indices"]),
            sampling_interval=int(data["sampling_interval"]),
            effective_rate=float(data["effective_rate"]),
            d_max=float(data["d_max"]),
            extended_beyond_alignment=bool(data["extended_beyond_alignment"]),
            shortfall=bool(data["shortfall"]),
            aligned_window=(int(data["aligned_window"][0]), int(data["aligned_window"][1])),
        )


def align_endpoints(s: TemporalTrajectory, c: TemporalTrajectory) -> tuple[int, int]:
    """Window of ``c`` demarked by the clear frames nearest to snowy frames.

    For each snowy frame the spatially nearest clear frame is found
    (ties to the lower index); the result is the (min, max) of those
    nearest indices.  Both trajectories must share one planar frame.
    """
    if len(s) == 0 or len(c) == 0:
        raise InvalidInputError("alignment requires non-empty trajectories")
    sp = s.positions
    cp = c.positions
    dx = sp[:, 0][:, None] - cp[None, :, 0]
    dy = sp[:, 1][:, None] - cp[None, :, 1]
    nearest = (dx * dx + dy * dy).argmin(axis=1)  # argmin takes the lowest index on ties
    return int(nearest.min()), int(nearest.max())


def select_sampling(
    c_prime_len: int,
    base_rate: float = 10.0,
    min_frames: int = 100,
    max_frames: int = 150,
    intervals: tuple[int, ...] = (1, 2, 3, 4, 5),
) -> SamplingChoice:
    """Choose the sampling stride for a window of ``c_prime_len`` frames.

    Sampling at stride k keeps frame 0 and every k-th after, i.e.
    ceil(len / k) frames.  The chosen stride is the largest one reaching
    ``min_frames``; if none does, stride falls back to the smallest with a
    shortfall flag.  A result above ``max_frames`` bumps the stride by one
    and uses exactly ``min_frames`` frames.
    """
    if c_prime_len < 1:
        raise InvalidInputError(f"window length must be >= 1, got {c_prime_len}")
    if min_frames > max_frames:
        raise InvalidInputError(f"min_frames {min_frames} > max_frames {max_frames}")
    if not intervals:
        raise InvalidInputError("intervals must be non-empty")
    intervals = tuple(sorted(int(k) for k in intervals))
    if intervals[0] < 1:
        raise InvalidInputError(f"intervals must be >= 1: {intervals}")

    qualifying = [k for k in intervals if math.ceil(c_prime_len / k) >= min_frames]
    if not qualifying:
        k = intervals[0]
        return SamplingChoice(k, math.ceil(c_prime_len / k), base_rate / k, True, False)
    k = max(qualifying)
    count = math.ceil(c_prime_len / k)
    if count > max_frames:
        k += 1
        return SamplingChoice(k, min_frames, base_rate / k, False, True)
    return SamplingChoice(k, count, base_rate / k, False, False)


def build_pair(
    s: TemporalTrajectory,
    c: TemporalTrajectory,
    match: MatchOutcome,
    config: RunConfig,
) -> PairedSubsequence:
    """Extract and sample the clear subsequence for a resolved match.

    The pair's d_max is recomputed from the spatial model of the sampled
    subsequence against the snowy model, so widening the window shows up
    as a larger discrepancy.  A window that cannot reach ``min_frames``
    even using the whole recording is still emitted, with the shortfall
    flag set.
    """
    if match.decision is None:
        raise InvalidInputError(f"{match.snowy_id}: match is not resolved")
    if match.decision.clear_id != c.sequence_id:
        raise InvalidInputError(
            f"{match.snowy_id}: decision names {match.decision.clear_id!r}, "
            f"got trajectory {c.sequence_id!r}"
        )
    first, last = aligned = align_endpoints(s, c)
    n = len(c)
    choice = select_sampling(
        last - first + 1,
        base_rate=config.base_rate_hz,
        min_frames=config.min_frames,
        max_frames=config.max_frames,
        intervals=config.intervals,
    )
    interval = choice.interval
    extended = False

    if choice.shortfall:
        span = interval * (config.min_frames - 1) + 1
        first, last, extended = _extend_alternating(first, last, n, span)
        count = min(config.min_frames, (last - first) // interval + 1)
    elif choice.capped:
        span = interval * (config.min_frames - 1) + 1
        first, last, extended = _extend_tail_then_head(first, last, n, span)
        count = min(config.min_frames, (last - first) // interval + 1)
    else:
        count = choice.frame_count

    indices = tuple(range(first, first + interval * count, interval))
    shortfall = count < config.min_frames

    sampled = c.positions[list(indices)]
    c_model = polyline_model(c.sequence_id, sampled, config.delta_d)
    s_model = polyline_model(s.sequence_id, s.positions, config.delta_d)
    discrepancy = directed_d_max(c_model, s_model)

    return PairedSubsequence(
        snowy_id=s.sequence_id,
        clear_id=c.sequence_id,
        clear_frame_indices=indices,
        sampling_interval=interval,
        effective_rate=config.base_rate_hz / interval,
        d_max=discrepancy,
        extended_beyond_alignment=extended,
        shortfall=shortfall,
        aligned_window=aligned,
    )


def _extend_alternating(first: int, last: int, n: int, target_len: int):
    """Widen [first, last] to target_len frames, alternating after/before."""
    extended = False
    while last - first + 1 < target_len:
        moved = False
        if last < n - 1:
            last += 1
            moved = extended = True
            if last - first + 1 >= target_len:
                break
        if first > 0:
            first -= 1
            moved = extended = True
        if not moved:
            break
    return first, last, extended


def _extend_tail_then_head(first: int, last: int, n: int, span: int):
    """Widen [first, last] to span frames, growing forward then backward."""
    extended = False
    while last - first + 1 < span and last < n - 1:
        last += 1
        extended = True
    while last - first + 1 < span and first > 0:
        first -= 1
        extended = True
    return first, last, extended
