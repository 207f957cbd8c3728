"""File formats: ingestion, exports, and the persisted run state.

Everything on disk is line-oriented text with a version header, so a
pairing can be audited with a pager and diffed between runs.  Exports
are deterministic: the same state always serializes to the same bytes.
The run state itself is a single JSON document with sorted keys.

Worked examples of every format live in the README.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .config import RunConfig
from .coverage import CoverageTable
from .endpoint import PairedSubsequence
from .errors import InvalidInputError, ParseError, StateVersionError
from .geo import GeoFrame, project_to_local, validate_latlon
from .matcher import CandidateInfo, Decision, MatchOutcome
from .spatial import TemporalTrajectory
from .splits import DOMAIN_CLEAR, DOMAIN_SNOWY, LabelPlan, MixedSplit, ROLE_TRAIN, ROLE_VALIDATION
from .stats import AnnotationRecord, DistributionReport, EcdfCurve

log = logging.getLogger(__name__)

TRAJECTORY_HEADER = "trajectory v1"
INDEX_HEADER = "index v1"
ANNOTATIONS_HEADER = "annotations v1"
COVERAGE_HEADER = "coverage v1"
MATCHES_HEADER = "matches v1"
PAIRS_HEADER = "pairs v1"
SPLITS_HEADER = "splits v1"
STATE_SCHEMA_VERSION = 1

INDEX_FILE = "index.txt"
ANNOTATIONS_FILE = "annotations.txt"
TRAJECTORY_SUFFIX = ".csv"

_ID_PATTERN = re.compile(r"^[A-Za-z0-9._-]+$")


def _check_id(name: str, path, line_no: int) -> str:
    if not _ID_PATTERN.match(name):
        raise ParseError(path, line_no, f"invalid sequence id {name!r}")
    return name


# ---------------------------------------------------------------------------
# ingestion


@dataclass
class Corpus:
    """All trajectories of one data directory, projected to a shared origin."""

    trajectories: dict[str, TemporalTrajectory] = field(default_factory=dict)
    domains: dict[str, str] = field(default_factory=dict)
    origin: tuple[float, float] | None = None

    def ids(self, domain: str) -> list[str]:
        return sorted(sid for sid, d in self.domains.items() if d == domain)

    @property
    def snowy_ids(self) -> list[str]:
        return self.ids(DOMAIN_SNOWY)

    @property
    def clear_ids(self) -> list[str]:
        return self.ids(DOMAIN_CLEAR)


def read_index_file(path) -> dict[str, str]:
    path = Path(path)
    lines = _read_lines(path)
    if not lines or lines[0] != INDEX_HEADER:
        raise ParseError(path, 1, f"expected header {INDEX_HEADER!r}")
    domains: dict[str, str] = {}
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(path, line_no, "expected 'sequence_id,domain'")
        sid = _check_id(parts[0].strip(), path, line_no)
        domain = parts[1].strip()
        if domain not in (DOMAIN_SNOWY, DOMAIN_CLEAR):
            raise ParseError(path, line_no, f"domain must be snowy or clear, got {domain!r}")
        if sid in domains:
            raise ParseError(path, line_no, f"duplicate sequence id {sid!r}")
        domains[sid] = domain
    return domains


def read_trajectory_file(path) -> tuple[str, list[GeoFrame]]:
    """Parse one trajectory file into validated GPS frames."""
    path = Path(path)
    lines = _read_lines(path)
    if not lines or not lines[0].startswith(TRAJECTORY_HEADER + " "):
        raise ParseError(path, 1, f"expected header '{TRAJECTORY_HEADER} <sequence_id>'")
    sid = _check_id(lines[0][len(TRAJECTORY_HEADER) + 1 :].strip(), path, 1)
    frames: list[GeoFrame] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ParseError(
                path, line_no, "expected 'frame_index,timestamp,latitude,longitude'"
            )
        try:
            idx = int(parts[0])
            ts = float(parts[1])
            lat = float(parts[2])
            lon = float(parts[3])
        except ValueError as exc:
            raise ParseError(path, line_no, f"malformed record: {exc}") from exc
        try:
            validate_latlon(lat, lon)
        except InvalidInputError as exc:
            raise ParseError(path, line_no, str(exc)) from exc
        if frames and ts <= frames[-1].timestamp:
            raise ParseError(
                path,
                line_no,
                f"timestamp {ts} not increasing at frame index {idx}",
            )
        frames.append(GeoFrame(idx, ts, lat, lon))
    if len(frames) < 2:
        raise ParseError(path, len(lines), f"{sid}: need at least 2 frames")
    return sid, frames


def load_trajectories(data_dir) -> Corpus:
    """Load every trajectory in a directory, projected to a shared origin.

    The sidecar ``index.txt`` assigns each sequence to the snowy or clear
    domain; the origin is the first frame of the first snowy sequence (in
    sorted id order).  An empty directory yields an empty corpus with a
    warning rather than an error.
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise InvalidInputError(f"data directory {data_dir} does not exist")
    files = sorted(data_dir.glob(f"*{TRAJECTORY_SUFFIX}"))
    index_path = data_dir / INDEX_FILE
    if not files and not index_path.exists():
        log.warning("no trajectory files in %s", data_dir)
        return Corpus()
    if not index_path.exists():
        raise InvalidInputError(f"missing {INDEX_FILE} next to trajectory files")
    domains = read_index_file(index_path)

    raw: dict[str, list[GeoFrame]] = {}
    for path in files:
        sid, frames = read_trajectory_file(path)
        if sid != path.stem:
            raise ParseError(path, 1, f"header id {sid!r} does not match file name")
        if sid in raw:
            raise ParseError(path, 1, f"duplicate sequence id {sid!r}")
        if sid not in domains:
            raise ParseError(path, 1, f"{sid!r} is not listed in {INDEX_FILE}")
        raw[sid] = frames
    missing = sorted(set(domains) - set(raw))
    if missing:
        raise InvalidInputError(f"index lists sequences without files: {missing}")

    snowy = sorted(sid for sid, d in domains.items() if d == DOMAIN_SNOWY)
    anchor_id = snowy[0] if snowy else (sorted(raw)[0] if raw else None)
    if anchor_id is None:
        log.warning("no sequences loaded from %s", data_dir)
        return Corpus()
    origin_frame = raw[anchor_id][0]

    trajectories: dict[str, TemporalTrajectory] = {}
    for sid, frames in raw.items():
        points = project_to_local(frames, origin_frame)
        trajectories[sid] = TemporalTrajectory.from_frames(
            sid, [(f.frame_index, f.timestamp, p) for f, p in zip(frames, points)]
        )
    return Corpus(
        trajectories=trajectories,
        domains=domains,
        origin=(origin_frame.latitude, origin_frame.longitude),
    )


def read_annotations(path) -> list[AnnotationRecord]:
    path = Path(path)
    lines = _read_lines(path)
    if not lines or lines[0] != ANNOTATIONS_HEADER:
        raise ParseError(path, 1, f"expected header {ANNOTATIONS_HEADER!r}")
    records: list[AnnotationRecord] = []
    seen: set[tuple[str, int, str]] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 9:
            raise ParseError(
                path,
                line_no,
                "expected 'sequence_id,frame_index,object_id,category,x,y,z,point_count,timestamp'",
            )
        try:
            rec = AnnotationRecord(
                sequence_id=parts[0].strip(),
                frame_index=int(parts[1]),
                object_id=parts[2].strip(),
                category=parts[3].strip(),
                x=float(parts[4]),
                y=float(parts[5]),
                z=float(parts[6]),
                point_count=int(parts[7]),
                timestamp=float(parts[8]),
            )
        except (ValueError, InvalidInputError) as exc:
            raise ParseError(path, line_no, f"malformed record: {exc}") from exc
        key = (rec.sequence_id, rec.frame_index, rec.object_id)
        if key in seen:
            raise ParseError(path, line_no, f"duplicate annotation {key}")
        seen.add(key)
        records.append(rec)
    return records


def _read_lines(path: Path) -> list[str]:
    try:
        return path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ParseError(path, 0, f"cannot read file: {exc}") from exc


# ---------------------------------------------------------------------------
# run state


@dataclass
class RunState:
    """Everything a matching run produced, round-trippable through JSON."""

    config: RunConfig
    data_dir: str
    origin: tuple[float, float] | None
    domains: dict[str, str]
    frame_counts: dict[str, int]
    road_users: dict[str, int] = field(default_factory=dict)
    coverage: CoverageTable | None = None
    outcomes: list[MatchOutcome] = field(default_factory=list)
    pairs: dict[str, PairedSubsequence] = field(default_factory=dict)
    schema_version: int = STATE_SCHEMA_VERSION

    @property
    def snowy_ids(self) -> list[str]:
        return sorted(s for s, d in self.domains.items() if d == DOMAIN_SNOWY)

    @property
    def clear_ids(self) -> list[str]:
        return sorted(s for s, d in self.domains.items() if d == DOMAIN_CLEAR)

    def pending_ids(self) -> list[str]:
        return [o.snowy_id for o in self.outcomes if o.decision is None]

    def outcome_for(self, snowy_id: str) -> MatchOutcome | None:
        for outcome in self.outcomes:
            if outcome.snowy_id == snowy_id:
                return outcome
        return None

    def replace_outcome(self, outcome: MatchOutcome) -> None:
        for pos, existing in enumerate(self.outcomes):
            if existing.snowy_id == outcome.snowy_id:
                self.outcomes[pos] = outcome
                return
        raise InvalidInputError(f"no outcome for {outcome.snowy_id!r}")

    def to_jsonable(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "config": self.config.to_jsonable(),
            "data_dir": self.data_dir,
            "origin": list(self.origin) if self.origin else None,
            "domains": dict(sorted(self.domains.items())),
            "frame_counts": dict(sorted(self.frame_counts.items())),
            "road_users": dict(sorted(self.road_users.items())),
            "coverage": self.coverage.to_jsonable() if self.coverage else None,
            "outcomes": [outcome_to_jsonable(o) for o in self.outcomes],
            "pairs": {sid: p.to_jsonable() for sid, p in sorted(self.pairs.items())},
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "RunState":
        return cls(
            config=RunConfig.from_jsonable(data["config"]),
            data_dir=data["data_dir"],
            origin=tuple(data["origin"]) if data.get("origin") else None,
            domains=dict(data["domains"]),
            frame_counts={k: int(v) for k, v in data["frame_counts"].items()},
            road_users={k: int(v) for k, v in data.get("road_users", {}).items()},
            coverage=CoverageTable.from_jsonable(data["coverage"]) if data.get("coverage") else None,
            outcomes=[outcome_from_jsonable(o) for o in data["outcomes"]],
            pairs={
                sid: PairedSubsequence.from_jsonable(p) for sid, p in data["pairs"].items()
            },
            schema_version=int(data["schema_version"]),
        )


def outcome_to_jsonable(outcome: MatchOutcome) -> dict:
    return {
        "snowy_id": outcome.snowy_id,
        "tier": outcome.tier,
        "status": outcome.status,
        "candidates": [
            {"clear_id": c.clear_id, "coverages": list(c.coverages), "d_max": c.d_max}
            for c in outcome.candidates
        ],
        "decision": (
            {
                "clear_id": outcome.decision.clear_id,
                "decided_by": outcome.decision.decided_by,
                "note": outcome.decision.note,
                "decided_at": outcome.decision.decided_at,
            }
            if outcome.decision
            else None
        ),
    }


def outcome_from_jsonable(data: dict) -> MatchOutcome:
    decision = None
    if data.get("decision"):
        d = data["decision"]
        decision = Decision(d["clear_id"], d["decided_by"], d.get("note", ""), d.get("decided_at"))
    return MatchOutcome(
        snowy_id=data["snowy_id"],
        tier=data["tier"],
        candidates=tuple(
            CandidateInfo(c["clear_id"], tuple(c["coverages"]), c["d_max"])
            for c in data["candidates"]
        ),
        status=data["status"],
        decision=decision,
    )


def save_state(state: RunState, path) -> None:
    """Serialize atomically: the old state survives a crash mid-write."""
    path = Path(path)
    payload = json.dumps(state.to_jsonable(), sort_keys=True, separators=(",", ":"))
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(payload, encoding="utf-8")
    os.replace(tmp, path)


def load_state(path) -> RunState:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(path, 0, f"cannot read state: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(path, 0, f"corrupt state file: {exc}") from exc
    version = data.get("schema_version") if isinstance(data, dict) else None
    if version != STATE_SCHEMA_VERSION:
        raise StateVersionError(
            f"state schema version {version!r} is not supported "
            f"(expected {STATE_SCHEMA_VERSION}); upgrade required"
        )
    return RunState.from_jsonable(data)


# ---------------------------------------------------------------------------
# exports


def write_coverage_table(table: CoverageTable, path) -> None:
    lines = [COVERAGE_HEADER]
    for sid, cid, theta, frac in table.rows():
        lines.append(f"{sid},{cid},{theta!r},{frac!r}")
    _write_lines(path, lines)


def write_match_report(outcomes: list[MatchOutcome], thetas, path) -> None:
    lines = [MATCHES_HEADER]
    for outcome in sorted(outcomes, key=lambda o: o.snowy_id):
        tier = outcome.tier if outcome.tier is not None else "none"
        lines.append(f"match {outcome.snowy_id} tier={tier} status={outcome.status}")
        for cand in outcome.candidates:
            covers = " ".join(
                f"cover@{theta!r}={frac!r}" for theta, frac in zip(thetas, cand.coverages)
            )
            dmax = repr(cand.d_max) if cand.d_max is not None else "none"
            lines.append(f"  candidate {cand.clear_id} d_max={dmax} {covers}")
        if outcome.decision:
            d = outcome.decision
            note = _one_line(d.note)
            lines.append(
                f"  decision {d.clear_id} by={d.decided_by} "
                f"at={d.decided_at or 'none'} note={note}"
            )
    _write_lines(path, lines)


def write_pair_manifest(pairs: dict[str, PairedSubsequence], path) -> None:
    lines = [PAIRS_HEADER]
    for sid in sorted(pairs):
        p = pairs[sid]
        start = p.clear_frame_indices[0] if p.clear_frame_indices else 0
        lines.append(
            f"pair {p.snowy_id} clear={p.clear_id} interval={p.sampling_interval} "
            f"rate={p.effective_rate!r} frames={p.frame_count} start={start} "
            f"window={p.aligned_window[0]}..{p.aligned_window[1]} d_max={p.d_max!r} "
            f"extended={str(p.extended_beyond_alignment).lower()} "
            f"shortfall={str(p.shortfall).lower()}"
        )
    _write_lines(path, lines)


def write_split_manifest(
    mixed: MixedSplit,
    validation_plans: list[LabelPlan],
    pairs: dict[str, PairedSubsequence],
    path,
) -> None:
    """Emit one label per line as ``domain,sequence_id,frame_index``.

    Clear plans index into the paired sampled subsequence; rows carry the
    original recording frame index so a labelling vendor can find the
    frame in the raw data.
    """
    lines = [f"{SPLITS_HEADER} fraction_snowy={mixed.fraction_snowy!r}"]
    lines.append("section train")
    lines.extend(_plan_rows(mixed.plans, pairs))
    lines.append("section validation")
    lines.extend(_plan_rows(validation_plans, pairs))

    for role, plans in ((ROLE_TRAIN, mixed.plans), (ROLE_VALIDATION, validation_plans)):
        for domain in (DOMAIN_SNOWY, DOMAIN_CLEAR):
            selected = [p for p in plans if p.domain == domain]
            labels = sum(p.label_count for p in selected)
            lines.append(
                f"summary domain={domain} role={role} labels={labels} "
                f"sequences={len(selected)}"
            )
    lines.append(
        f"summary total_train={mixed.total_labels} reference={mixed.reference_labels} "
        f"within_tolerance={str(mixed.within_tolerance).lower()}"
    )
    _write_lines(path, lines)


def _plan_rows(plans, pairs: dict[str, PairedSubsequence]) -> list[str]:
    rows = []
    for plan in sorted(plans, key=lambda p: (p.domain, p.sequence_id, p.pair_snowy_id or "")):
        if plan.domain == DOMAIN_CLEAR and plan.pair_snowy_id is not None:
            pair = pairs.get(plan.pair_snowy_id)
            if pair is None:
                raise InvalidInputError(
                    f"{plan.sequence_id}: no pair recorded for {plan.pair_snowy_id!r}"
                )
            indices = [pair.clear_frame_indices[i] for i in plan.labelled_indices]
        else:
            indices = list(plan.labelled_indices)
        rows.extend(f"{plan.domain},{plan.sequence_id},{i}" for i in indices)
    return rows


def write_stats_report(report: DistributionReport, path) -> None:
    lines = ["stats v1"]
    for domain, stats in ((DOMAIN_SNOWY, report.snowy), (DOMAIN_CLEAR, report.clear)):
        for category, count in stats.category_counts.items():
            lines.append(f"instances domain={domain} category={category} count={count}")
        lines.append(
            f"motion domain={domain} stationary={stats.stationary} "
            f"dynamic={stats.dynamic} undefined={stats.undefined_tracks}"
        )
        lines.append(
            f"samples domain={domain} point_count={len(stats.point_count_ecdf)} "
            f"objects_per_frame={len(stats.objects_per_frame_ecdf)} "
            f"track_speed={len(stats.speed_ecdf) if stats.speed_ecdf else 0}"
        )
    for name in sorted(report.ks):
        value = report.ks[name]
        lines.append(f"ks {name}={value!r}" if value is not None else f"ks {name}=none")
    _write_lines(path, lines)


def write_ecdf(curve: EcdfCurve, path) -> None:
    lines = ["ecdf v1"]
    lines.extend(f"{v!r},{f!r}" for v, f in zip(curve.values, curve.fractions))
    _write_lines(path, lines)


def _one_line(text: str) -> str:
    return " ".join(str(text).split()) if text else ""


def _write_lines(path, lines: list[str]) -> None:
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
