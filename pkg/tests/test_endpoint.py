import math

import numpy as np
import pytest

from trajpair.config import RunConfig
from trajpair.coverage import d_max
from trajpair.endpoint import align_endpoints, build_pair, select_sampling
from trajpair.errors import InvalidInputError
from trajpair.matcher import Decision, MatchOutcome, STATUS_MATCHED
from trajpair.spatial import TemporalTrajectory, polyline_model

CONFIG = RunConfig()


def traj(positions, sequence_id="t", dt=0.1):
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    n = len(positions)
    return TemporalTrajectory(sequence_id, np.arange(n), np.arange(n) * dt, positions, dt)


def resolved_match(snowy_id, clear_id):
    return MatchOutcome(
        snowy_id, 1, (), STATUS_MATCHED, Decision(clear_id, "human", "", None)
    )


def line(n, start_x=0.0, y=0.0, step=1.0):
    return [(start_x + i * step, y) for i in range(n)]


# ---------------------------------------------------------------------------
# align_endpoints


def test_align_identical_trajectories():
    c = traj(line(50), "c")
    s = traj(line(50), "s")
    assert align_endpoints(s, c) == (0, 49)


def test_align_middle_third():
    c = traj(line(300), "c")
    s = traj(line(100, start_x=100.0), "s")
    first, last = align_endpoints(s, c)
    # brute-force nearest-frame oracle
    nearest = [
        min(range(len(c)), key=lambda j: (s.positions[i] - c.positions[j]) @ (s.positions[i] - c.positions[j]))
        for i in range(len(s))
    ]
    assert (first, last) == (min(nearest), max(nearest)) == (100, 199)


def test_align_stationary_snowy_hits_single_frame():
    c = traj(line(100), "c")
    s_positions = np.tile(c.positions[37], (20, 1))
    s = traj(s_positions, "s")
    assert align_endpoints(s, c) == (37, 37)


def test_align_tie_goes_to_lower_index():
    c = traj(line(10), "c")
    s = traj([(3.5, 0.0), (3.5, 0.0)], "s")  # exactly between frames 3 and 4
    assert align_endpoints(s, c) == (3, 3)


def test_align_rejects_empty():
    empty = traj(line(5), "c")
    object.__setattr__(empty, "positions", np.empty((0, 2)))
    object.__setattr__(empty, "timestamps", np.empty(0))
    with pytest.raises(InvalidInputError):
        align_endpoints(traj(line(5)), empty)


# ---------------------------------------------------------------------------
# select_sampling


def test_sampling_examples():
    choice = select_sampling(520)
    assert (choice.interval, choice.frame_count) == (5, 104)
    assert choice.effective_rate == pytest.approx(2.0)

    choice = select_sampling(260)
    assert (choice.interval, choice.frame_count) == (2, 130)
    assert choice.effective_rate == pytest.approx(5.0)

    choice = select_sampling(160)
    assert (choice.interval, choice.frame_count) == (2, 100)
    assert choice.capped and not choice.shortfall

    choice = select_sampling(60)
    assert (choice.interval, choice.frame_count) == (1, 60)
    assert choice.shortfall and not choice.capped


def expected_sampling(length, min_frames=100, max_frames=150, intervals=(1, 2, 3, 4, 5)):
    """Independent restatement of the stride rule."""
    best = None
    for k in intervals:
        if math.ceil(length / k) >= min_frames:
            best = k
    if best is None:
        return intervals[0], math.ceil(length / intervals[0]), True, False
    count = math.ceil(length / best)
    if count > max_frames:
        return best + 1, min_frames, False, True
    return best, count, False, False


def test_sampling_exhaustive_against_oracle():
    for length in range(1, 2001):
        choice = select_sampling(length)
        assert (
            choice.interval,
            choice.frame_count,
            choice.shortfall,
            choice.capped,
        ) == expected_sampling(length), f"length={length}"
        assert choice.effective_rate == 10.0 / choice.interval
        # maximality: the next larger allowed stride would fall short
        if not choice.capped and not choice.shortfall and choice.interval + 1 <= 5:
            assert math.ceil(length / (choice.interval + 1)) < 100


def test_sampling_rates_cover_the_allowed_set():
    rates = {round(select_sampling(k * 100).effective_rate, 1) for k in (1, 2, 3, 4, 5)}
    assert rates == {10.0, 5.0, 3.3, 2.5, 2.0}


def test_sampling_validation():
    with pytest.raises(InvalidInputError):
        select_sampling(0)
    with pytest.raises(InvalidInputError):
        select_sampling(100, min_frames=200, max_frames=100)
    with pytest.raises(InvalidInputError):
        select_sampling(100, intervals=())


# ---------------------------------------------------------------------------
# build_pair


def test_build_pair_full_overlap():
    c = traj(line(320), "c")
    s = traj(line(320), "s")
    pair = build_pair(s, c, resolved_match("s", "c"), CONFIG)
    assert pair.sampling_interval == 3
    assert pair.frame_count == 107
    assert pair.effective_rate == pytest.approx(10.0 / 3.0)
    assert not pair.extended_beyond_alignment
    assert not pair.shortfall
    assert pair.aligned_window == (0, 319)
    diffs = np.diff(pair.clear_frame_indices)
    assert (diffs == 3).all()


def test_build_pair_short_window_extends():
    c = traj(line(400), "c")
    s = traj(line(60, start_x=170.0), "s")
    pair = build_pair(s, c, resolved_match("s", "c"), CONFIG)
    assert pair.aligned_window == (170, 229)
    assert pair.frame_count == 100
    assert pair.sampling_interval == 1
    assert pair.extended_beyond_alignment
    assert not pair.shortfall
    assert min(pair.clear_frame_indices) >= 0
    assert max(pair.clear_frame_indices) <= 399


def test_build_pair_stationary_snowy_extends_around_frame():
    c = traj(line(400), "c")
    s = traj(np.tile(c.positions[37], (30, 1)), "s")
    pair = build_pair(s, c, resolved_match("s", "c"), CONFIG)
    assert pair.aligned_window == (37, 37)
    assert pair.frame_count == 100
    assert pair.extended_beyond_alignment
    indices = pair.clear_frame_indices
    assert indices[0] >= 0 and indices[-1] <= 399
    assert 37 in indices


def test_build_pair_capped_uses_exactly_min_frames():
    c = traj(line(400), "c")
    s = traj(line(160, start_x=100.0), "s")
    pair = build_pair(s, c, resolved_match("s", "c"), CONFIG)
    assert pair.sampling_interval == 2
    assert pair.frame_count == 100
    assert not pair.shortfall
    # the 160-frame window cannot host 100 frames at stride 2: it grew
    assert pair.extended_beyond_alignment
    diffs = np.diff(pair.clear_frame_indices)
    assert (diffs == 2).all()


def test_build_pair_whole_recording_too_short_flags_shortfall():
    c = traj(line(80), "c")
    s = traj(line(60, start_x=10.0), "s")
    pair = build_pair(s, c, resolved_match("s", "c"), CONFIG)
    assert pair.frame_count == 80  # everything there is
    assert pair.shortfall
    assert pair.extended_beyond_alignment
    assert pair.clear_frame_indices == tuple(range(80))


def test_build_pair_requires_resolution():
    c = traj(line(200), "c")
    s = traj(line(200), "s")
    pending = MatchOutcome("s", 2, (), "needs_review", None)
    with pytest.raises(InvalidInputError):
        build_pair(s, c, pending, CONFIG)


def test_build_pair_dmax_from_sampled_model_against_snowy():
    c = traj(line(400), "c")
    s = traj(line(60, start_x=170.0), "s")
    pair = build_pair(s, c, resolved_match("s", "c"), CONFIG)
    sampled = c.positions[list(pair.clear_frame_indices)]
    expected = d_max(
        polyline_model("c", sampled, CONFIG.delta_d),
        polyline_model("s", s.positions, CONFIG.delta_d),
    )
    assert pair.d_max == expected
    # the window extension reaches beyond the snowy span, growing d_max
    aligned_only = c.positions[170:230]
    tight = d_max(
        polyline_model("c", aligned_only, CONFIG.delta_d),
        polyline_model("s", s.positions, CONFIG.delta_d),
    )
    assert pair.d_max > tight


def test_pair_round_trips_through_json():
    c = traj(line(320), "c")
    s = traj(line(320), "s")
    pair = build_pair(s, c, resolved_match("s", "c"), CONFIG)
    from trajpair.endpoint import PairedSubsequence

    assert PairedSubsequence.from_jsonable(pair.to_jsonable()) == pair
