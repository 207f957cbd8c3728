"""Spatial coverage between snowy and clear models, plus d_max.

cover(s, c, theta) is the fraction of points of snowy model s lying
within theta meters (inclusive) of some point of clear model c.  d_max
is the greatest minimum distance from a point of the first model to the
second one (directed Hausdorff).  Both are exact set computations; the
uniform grid only prunes candidates and never changes a comparison, so
results match a brute-force double loop bit for bit.

Table construction is embarrassingly parallel over (s, c) pairs; an
index is built once per clear model and only read afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnknownSequenceError
from .spatial import SpatialModel

DEFAULT_THETAS = (2.0, 4.0, 8.0)

# Cells are padded a hair beyond the query radius so a point at exactly
# radius distance can never fall outside the 3x3 neighborhood through
# floating-point cell assignment.
_CELL_MARGIN = 1.0 + 1e-12


@dataclass(frozen=True)
class LateralThresholds:
    """Ordered set of lateral distances (meters) to evaluate coverage at."""

    values: tuple[float, ...] = DEFAULT_THETAS

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if not vals:
            raise InvalidInputError("need at least one lateral threshold")
        if any(v <= 0 for v in vals):
            raise InvalidInputError(f"thresholds must be positive: {vals}")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidInputError(f"thresholds must be strictly increasing: {vals}")

    @property
    def max(self) -> float:
        return self.values[-1]

    @property
    def min(self) -> float:
        return self.values[0]

    def __iter__(self):
        return iter(self.values)

    def __len__(self) -> int:
        return len(self.values)


def _distances(queries: np.ndarray, points: np.ndarray) -> np.ndarray:
    dx = queries[:, 0][:, None] - points[None, :, 0]
    dy = queries[:, 1][:, None] - points[None, :, 1]
    return dx * dx + dy * dy


class GridIndex:
    """Uniform grid over planar points for nearest-distance queries.

    ``min_distance_within`` requires the query radius to be at most the
    cell size: the 3x3 cell neighborhood then contains every point within
    that radius.  ``min_distance`` is exact at any distance via expanding
    ring search.
    """

    def __init__(self, points: np.ndarray, cell_size: float):
        points = np.asarray(points, dtype=np.float64)
        if len(points) == 0:
            raise InvalidInputError("cannot index an empty point set")
        if cell_size <= 0:
            raise InvalidInputError(f"cell size must be positive, got {cell_size}")
        self.points = points
        self.cell_size = float(cell_size)
        cells = np.floor(points / self.cell_size).astype(np.int64)
        self._cell_min = cells.min(axis=0)
        self._cell_max = cells.max(axis=0)
        self._buckets: dict[tuple[int, int], np.ndarray] = {
            cell: idx for cell, idx in _group_by_cell(cells)
        }

    def min_distance_within(self, queries: np.ndarray, radius: float) -> np.ndarray:
        """Per-query minimum distance, valid up to ``radius``.

        Entries may exceed ``radius`` (including +inf when the neighborhood
        is empty); such values only certify that no point lies within the
        radius, they are not exact minima.
        """
        if radius > self.cell_size * _CELL_MARGIN:
            raise InvalidInputError(
                f"radius {radius} exceeds index cell size {self.cell_size}"
            )
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        out = np.full(len(queries), np.inf)
        qcells = np.floor(queries / self.cell_size).astype(np.int64)
        for (cx, cy), qidx in _group_by_cell(qcells):
            hits = [
                self._buckets[key]
                for key in (
                    (cx + dx, cy + dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                )
                if key in self._buckets
            ]
            if not hits:
                continue
            cand = np.concatenate(hits)
            d2 = _distances(queries[qidx], self.points[cand])
            out[qidx] = np.sqrt(d2.min(axis=1))
        return out

    def min_distance(self, queries: np.ndarray) -> np.ndarray:
        """Exact per-query minimum distance to the indexed points."""
        queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        out = np.empty(len(queries))
        h = self.cell_size
        for (cx, cy), qidx in _group_by_cell(np.floor(queries / h).astype(np.int64)):
            sub = queries[qidx]
            best = np.full(len(qidx), np.inf)
            max_ring = int(
                max(
                    abs(cx - self._cell_min[0]),
                    abs(cx - self._cell_max[0]),
                    abs(cy - self._cell_min[1]),
                    abs(cy - self._cell_max[1]),
                )
            )
            r = 0
            while True:
                hits = [
                    self._buckets[key] for key in self._ring(cx, cy, r) if key in self._buckets
                ]
                if hits:
                    cand = np.concatenate(hits)
                    d2 = _distances(sub, self.points[cand])
                    best = np.minimum(best, np.sqrt(d2.min(axis=1)))
                # Points in cells beyond Chebyshev ring r are at least r*h
                # away; requiring a whole ring of slack keeps the early stop
                # safe against cell assignment rounding at boundaries.
                if float(best.max()) <= (r - 1) * h or r > max_ring:
                    break
                r += 1
            out[qidx] = best
        return out

    def _ring(self, cx: int, cy: int, r: int):
        if r == 0:
            yield (cx, cy)
            return
        lo_x, lo_y = self._cell_min
        hi_x, hi_y = self._cell_max
        for x in range(max(cx - r, lo_x), min(cx + r, hi_x) + 1):
            if lo_y <= cy - r <= hi_y:
                yield (x, cy - r)
            if lo_y <= cy + r <= hi_y:
                yield (x, cy + r)
        for y in range(max(cy - r + 1, lo_y), min(cy + r - 1, hi_y) + 1):
            if lo_x <= cx - r <= hi_x:
                yield (cx - r, y)
            if lo_x <= cx + r <= hi_x:
                yield (cx + r, y)


def _group_by_cell(cells: np.ndarray):
    """Yield ((cx, cy), indices) for each occupied cell."""
    if len(cells) == 0:
        return
    order = np.lexsort((cells[:, 1], cells[:, 0]))
    ordered = cells[order]
    changed = np.nonzero((np.diff(ordered, axis=0) != 0).any(axis=1))[0] + 1
    for group in np.split(order, changed):
        cx, cy = cells[group[0]]
        yield (int(cx), int(cy)), group


def cover(s: SpatialModel, c: SpatialModel, theta: float, *, index: GridIndex | None = None) -> float:
    """Fraction of points of ``s`` within ``theta`` meters of some point of ``c``.

    The boundary is inclusive.  ``index`` may be a prebuilt grid over the
    points of ``c`` with cell size >= theta.
    """
    if len(s) == 0 or len(c) == 0:
        raise InvalidInputError("coverage requires non-empty models")
    if theta <= 0:
        raise InvalidInputError(f"theta must be positive, got {theta}")
    if index is None:
        index = GridIndex(c.points, theta * _CELL_MARGIN)
    dmin = index.min_distance_within(s.points, theta)
    return float(np.count_nonzero(dmin <= theta) / len(s))


def d_max(s: SpatialModel, c: SpatialModel, *, index: GridIndex | None = None) -> float:
    """Greatest minimum distance from a point of ``s`` to the points of ``c``."""
    if len(s) == 0 or len(c) == 0:
        raise InvalidInputError("d_max requires non-empty models")
    if index is None:
        index = GridIndex(c.points, _default_cell(c.points))
    return float(index.min_distance(s.points).max())


def _default_cell(points: np.ndarray) -> float:
    span = float(np.ptp(points, axis=0).max()) if len(points) > 1 else 0.0
    if span == 0.0:
        return 1.0
    return max(span / max(4.0, np.sqrt(len(points))), 1e-9)


class CoverageTable:
    """Complete cover(s, c, theta) values over snowy x clear x thresholds."""

    def __init__(self, thetas: LateralThresholds):
        self.thetas = thetas
        self._entries: dict[tuple[str, str], tuple[float, ...]] = {}
        self._snowy: set[str] = set()
        self._clear: set[str] = set()

    def put(self, snowy_id: str, clear_id: str, fractions) -> None:
        fractions = tuple(float(f) for f in fractions)
        if len(fractions) != len(self.thetas):
            raise InvalidInputError(
                f"expected {len(self.thetas)} fractions, got {len(fractions)}"
            )
        if any(not 0.0 <= f <= 1.0 for f in fractions):
            raise InvalidInputError(f"fractions outside [0, 1]: {fractions}")
        if any(b < a for a, b in zip(fractions, fractions[1:])):
            raise InvalidInputError(
                f"coverage must be non-decreasing in theta: {fractions}"
            )
        self._entries[(snowy_id, clear_id)] = fractions
        self._snowy.add(snowy_id)
        self._clear.add(clear_id)

    @property
    def snowy_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._snowy))

    @property
    def clear_ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._clear))

    def _theta_pos(self, theta: float) -> int:
        try:
            return self.thetas.values.index(float(theta))
        except ValueError:
            raise UnknownSequenceError(f"theta {theta} not in {self.thetas.values}") from None

    def fractions(self, snowy_id: str, clear_id: str) -> tuple[float, ...]:
        self._check_snowy(snowy_id)
        try:
            return self._entries[(snowy_id, clear_id)]
        except KeyError:
            raise UnknownSequenceError(
                f"no coverage entry for pair ({snowy_id}, {clear_id})"
            ) from None

    def get(self, snowy_id: str, clear_id: str, theta: float) -> float:
        return self.fractions(snowy_id, clear_id)[self._theta_pos(theta)]

    def _check_snowy(self, snowy_id: str) -> None:
        if snowy_id not in self._snowy:
            raise UnknownSequenceError(f"unknown snowy sequence {snowy_id!r}")

    def rows(self):
        """Yield (snowy_id, clear_id, theta, fraction) in deterministic order."""
        for sid in self.snowy_ids:
            for cid in self.clear_ids:
                fracs = self._entries[(sid, cid)]
                for theta, frac in zip(self.thetas.values, fracs):
                    yield sid, cid, theta, frac

    def to_jsonable(self) -> dict:
        nonzero = [
            [sid, cid, list(fracs)]
            for (sid, cid), fracs in sorted(self._entries.items())
            if any(f != 0.0 for f in fracs)
        ]
        return {
            "thetas": list(self.thetas.values),
            "snowy_ids": list(self.snowy_ids),
            "clear_ids": list(self.clear_ids),
            "nonzero": nonzero,
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "CoverageTable":
        table = cls(LateralThresholds(tuple(data["thetas"])))
        zero = (0.0,) * len(table.thetas)
        for sid in data["snowy_ids"]:
            for cid in data["clear_ids"]:
                table.put(sid, cid, zero)
        for sid, cid, fracs in data["nonzero"]:
            table.put(sid, cid, fracs)
        return table


def coverage_table(
    snowy_models: list[SpatialModel],
    clear_models: list[SpatialModel],
    thresholds: LateralThresholds | None = None,
) -> CoverageTable:
    """Evaluate cover(s, c, theta) for every pair and threshold.

    Pairs whose bounding boxes are farther apart than the largest
    threshold are zero without any point query.
    """
    if not snowy_models or not clear_models:
        raise InvalidInputError("coverage table requires non-empty model lists")
    thresholds = thresholds or LateralThresholds()
    tmax = thresholds.max
    table = CoverageTable(thresholds)
    clear_boxes = {c.sequence_id: _bounds(c.points) for c in clear_models}
    indexes: dict[str, GridIndex] = {}
    zero = (0.0,) * len(thresholds)
    # Safety margin so box pruning can never disagree with point distances.
    cutoff = tmax * (1.0 + 1e-9) + 1e-9
    for s in snowy_models:
        sbox = _bounds(s.points)
        for c in clear_models:
            if _box_gap(sbox, clear_boxes[c.sequence_id]) > cutoff:
                table.put(s.sequence_id, c.sequence_id, zero)
                continue
            index = indexes.get(c.sequence_id)
            if index is None:
                index = GridIndex(c.points, tmax * _CELL_MARGIN)
                indexes[c.sequence_id] = index
            try:
                dmin = index.min_distance_within(s.points, tmax)
            except Exception as exc:  # annotate with the offending pair
                raise InvalidInputError(
                    f"coverage failed for pair ({s.sequence_id}, {c.sequence_id}): {exc}"
                ) from exc
            n = len(s)
            fractions = tuple(
                float(np.count_nonzero(dmin <= theta) / n) for theta in thresholds
            )
            table.put(s.sequence_id, c.sequence_id, fractions)
    return table


def _bounds(points: np.ndarray) -> tuple[float, float, float, float]:
    return (
        float(points[:, 0].min()),
        float(points[:, 0].max()),
        float(points[:, 1].min()),
        float(points[:, 1].max()),
    )


def _box_gap(a, b) -> float:
    gx = max(0.0, max(a[0] - b[1], b[0] - a[1]))
    gy = max(0.0, max(a[2] - b[3], b[2] - a[3]))
    return float(np.sqrt(gx * gx + gy * gy))
