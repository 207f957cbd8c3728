"""Shared fixtures: synthetic corpora and independent geometry oracles."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from trajpair.geo import EARTH_RADIUS_M

LAT0 = 43.47
LON0 = -80.54
FRAME_DT = 0.1  # 10 Hz recordings


def haversine_m(lat1, lon1, lat2, lon2, radius=EARTH_RADIUS_M):
    """Great-circle distance; the independent oracle for the projection."""
    p1 = math.radians(lat1)
    p2 = math.radians(lat2)
    dp = p2 - p1
    dl = math.radians(lon2 - lon1)
    a = math.sin(dp / 2) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2) ** 2
    return 2 * radius * math.asin(math.sqrt(a))


def xy_to_latlon(x, y, lat0=LAT0, lon0=LON0):
    """Inverse of the equirectangular projection used to lay out corpora."""
    lat = lat0 + math.degrees(y / EARTH_RADIUS_M)
    lon = lon0 + math.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(lat0))))
    return lat, lon


def line_positions(start, heading_deg, speeds):
    """Planar positions advancing by one speed value per time step."""
    heading = math.radians(heading_deg)
    direction = np.array([math.cos(heading), math.sin(heading)])
    steps = np.concatenate([[0.0], np.asarray(speeds, dtype=float) * FRAME_DT])
    return np.asarray(start, dtype=float) + np.cumsum(steps)[:, None] * direction


def write_trajectory(data_dir: Path, sequence_id: str, positions, t0=0.0) -> None:
    lines = [f"trajectory v1 {sequence_id}"]
    for i, (x, y) in enumerate(np.atleast_2d(positions)):
        lat, lon = xy_to_latlon(float(x), float(y))
        lines.append(f"{i},{t0 + i * FRAME_DT!r},{lat!r},{lon!r}")
    (data_dir / f"{sequence_id}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_index(data_dir: Path, domains: dict[str, str]) -> None:
    lines = ["index v1"] + [f"{sid},{dom}" for sid, dom in sorted(domains.items())]
    (data_dir / "index.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def make_basic_corpus(
    data_dir: Path, *, with_tie=False, with_unmatched=False, with_second=False
) -> dict[str, str]:
    """Small city: one snowy route fully covered by one clear sequence.

    Optionally adds a second fully covered pair, a snowy route flanked by
    two mirror-image clear sequences (a guaranteed review tie), and a
    snowy route on a road no clear sequence visits (unmatched).
    """
    data_dir.mkdir(parents=True, exist_ok=True)
    domains: dict[str, str] = {}

    rng = np.random.default_rng(7)

    def speeds(n):
        return rng.uniform(8.0, 12.0, size=n)

    # snowy_a along y=0, fully covered by clear_a on the same lane
    snowy_a = line_positions((0.0, 0.0), 0.0, speeds(99))
    clear_a = line_positions((-40.0, 0.6), 0.0, speeds(220))
    write_trajectory(data_dir, "snowy_a", snowy_a)
    write_trajectory(data_dir, "clear_a", clear_a)
    domains["snowy_a"] = "snowy"
    domains["clear_a"] = "clear"

    if with_second:
        snowy_c = line_positions((0.0, 4000.0), 0.0, speeds(99))
        clear_c = line_positions((-50.0, 4000.8), 0.0, speeds(240))
        write_trajectory(data_dir, "snowy_c", snowy_c)
        write_trajectory(data_dir, "clear_c", clear_c)
        domains["snowy_c"] = "snowy"
        domains["clear_c"] = "clear"

    if with_tie:
        # snowy_b along y=2000 with clear twins offset +3 m and -3 m
        snowy_b = line_positions((0.0, 2000.0), 0.0, np.full(99, 10.0))
        clear_up = line_positions((-30.0, 2003.0), 0.0, np.full(200, 10.0))
        clear_down = line_positions((-30.0, 1997.0), 0.0, np.full(200, 10.0))
        write_trajectory(data_dir, "snowy_b", snowy_b)
        write_trajectory(data_dir, "clear_up", clear_up)
        write_trajectory(data_dir, "clear_down", clear_down)
        domains["snowy_b"] = "snowy"
        domains["clear_up"] = "clear"
        domains["clear_down"] = "clear"

    if with_unmatched:
        snowy_far = line_positions((50_000.0, 50_000.0), 45.0, speeds(99))
        write_trajectory(data_dir, "snowy_far", snowy_far)
        domains["snowy_far"] = "snowy"

    write_index(data_dir, domains)
    return domains


@pytest.fixture
def basic_corpus(tmp_path):
    data_dir = tmp_path / "data"
    make_basic_corpus(data_dir)
    return data_dir


@pytest.fixture
def review_corpus(tmp_path):
    data_dir = tmp_path / "data"
    make_basic_corpus(data_dir, with_tie=True, with_unmatched=True)
    return data_dir


# ---------------------------------------------------------------------------
# brute-force oracles


def brute_cover(s_points, c_points, theta) -> float:
    s_points = np.asarray(s_points, dtype=float)
    c_points = np.asarray(c_points, dtype=float)
    dx = s_points[:, 0][:, None] - c_points[None, :, 0]
    dy = s_points[:, 1][:, None] - c_points[None, :, 1]
    dist = np.sqrt(dx * dx + dy * dy)
    covered = (dist <= theta).any(axis=1)
    return float(np.count_nonzero(covered) / len(s_points))


def brute_d_max(s_points, c_points) -> float:
    s_points = np.asarray(s_points, dtype=float)
    c_points = np.asarray(c_points, dtype=float)
    dx = s_points[:, 0][:, None] - c_points[None, :, 0]
    dy = s_points[:, 1][:, None] - c_points[None, :, 1]
    dist = np.sqrt(dx * dx + dy * dy)
    return float(dist.min(axis=1).max())


def walk_polyline(points, step):
    """Independent constant-spacing walker used to cross-check resampling."""
    points = [np.asarray(p, dtype=float) for p in np.atleast_2d(points)]
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        total += math.sqrt(float((b - a) @ (b - a)))
    n_steps = int(total // step)
    while n_steps * step > total:
        n_steps -= 1

    out = [points[0]]
    walked = 0.0
    seg = 0
    for j in range(1, n_steps + 1):
        target = j * step
        while True:
            a, b = points[seg], points[seg + 1]
            seg_len = math.sqrt(float((b - a) @ (b - a)))
            if walked + seg_len >= target and seg_len > 0.0:
                frac = (target - walked) / seg_len
                out.append(a + frac * (b - a))
                break
            walked += seg_len
            seg += 1
    return np.array(out)
