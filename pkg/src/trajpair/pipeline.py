"""End-to-end matching pipeline: ingest, interpolate, cover, match, pair.

Re-running on unchanged inputs is idempotent: every artifact is written
in a deterministic order and auto decisions carry no wall-clock data.
Human decisions found in an existing state file are re-applied to the
freshly computed outcomes, so a run after a review session completes the
pair manifests without losing anything.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

from . import manifest
from .config import RunConfig
from .coverage import GridIndex, coverage_table, d_max
from .endpoint import build_pair
from .errors import DegenerateModelError, InvalidInputError, TrajPairError
from .matcher import MatchOutcome, apply_decision, tiered_select
from .spatial import SpatialModel, interpolate_constant_distance, polyline_model
from .splits import DOMAIN_CLEAR, DOMAIN_SNOWY

log = logging.getLogger(__name__)

STATE_FILE = "state.json"
COVERAGE_FILE = "coverage.txt"
MATCHES_FILE = "matches.txt"
PAIRS_FILE = "pairs.txt"
STATS_FILE = "stats.txt"


@dataclass
class PipelineResult:
    state: manifest.RunState
    out_dir: Path
    pending: int
    warnings: list[str] = field(default_factory=list)


def build_models(corpus: manifest.Corpus, delta_d: float):
    """Spatial models for every trajectory; near-stationary sequences are
    collapsed to a single point with a warning instead of being dropped."""
    models: dict[str, SpatialModel] = {}
    warnings: list[str] = []
    for sid in sorted(corpus.trajectories):
        traj = corpus.trajectories[sid]
        try:
            models[sid] = interpolate_constant_distance(traj, delta_d)
        except DegenerateModelError as exc:
            warnings.append(
                f"{sid}: arc length {exc.arc_length:.3g} m below spacing "
                f"{delta_d} m; using a single-point model"
            )
            models[sid] = polyline_model(sid, traj.positions, delta_d)
    return models, warnings


def run_pipeline(
    config: RunConfig,
    data_dir,
    out_dir,
    state_path=None,
) -> PipelineResult:
    data_dir = Path(data_dir)
    out_dir = Path(out_dir)
    if not data_dir.is_dir():
        raise InvalidInputError(f"data directory {data_dir} does not exist")
    state_path = Path(state_path) if state_path else out_dir / STATE_FILE

    prior_decisions = _load_prior_decisions(state_path)
    corpus = manifest.load_trajectories(data_dir)
    models, warnings = build_models(corpus, config.delta_d)

    snowy_ids = corpus.snowy_ids
    clear_ids = corpus.clear_ids
    table = None
    outcomes: list[MatchOutcome] = []
    if snowy_ids and clear_ids:
        table = coverage_table(
            [models[sid] for sid in snowy_ids],
            [models[cid] for cid in clear_ids],
            config.thresholds(),
        )
        dmax_cache: dict[tuple[str, str], float] = {}
        indexes: dict[str, GridIndex] = {}

        def dmax_of(sid: str, cid: str) -> float:
            key = (sid, cid)
            if key not in dmax_cache:
                index = indexes.get(cid)
                if index is None:
                    index = GridIndex(models[cid].points, config.thetas[-1])
                    indexes[cid] = index
                dmax_cache[key] = d_max(models[sid], models[cid], index=index)
            return dmax_cache[key]

        for sid in snowy_ids:
            outcome = tiered_select(table, sid, dmax_of=dmax_of)
            previous = prior_decisions.get(sid)
            if previous is not None and outcome.decision is None:
                try:
                    outcome = apply_decision(
                        outcome,
                        previous.clear_id,
                        previous.note,
                        known_clear_ids=clear_ids,
                        decided_at=previous.decided_at,
                    )
                except TrajPairError as exc:
                    warnings.append(f"{sid}: stored decision no longer applies: {exc}")
            outcomes.append(outcome)
    elif snowy_ids or clear_ids:
        warnings.append("need both snowy and clear sequences to match; skipping coverage")

    pairs = {}
    for outcome in outcomes:
        if outcome.decision is None:
            continue
        s = corpus.trajectories[outcome.snowy_id]
        c = corpus.trajectories[outcome.decision.clear_id]
        pairs[outcome.snowy_id] = build_pair(s, c, outcome, config)

    frame_counts = {sid: len(t) for sid, t in corpus.trajectories.items()}
    road_users, stats_report, stats_warnings = _annotation_stats(config, data_dir, corpus)
    warnings.extend(stats_warnings)

    state = manifest.RunState(
        config=config,
        data_dir=str(data_dir),
        origin=corpus.origin,
        domains=corpus.domains,
        frame_counts=frame_counts,
        road_users=road_users,
        coverage=table,
        outcomes=outcomes,
        pairs=pairs,
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    if table is not None:
        manifest.write_coverage_table(table, out_dir / COVERAGE_FILE)
    manifest.write_match_report(outcomes, config.thetas, out_dir / MATCHES_FILE)
    manifest.write_pair_manifest(pairs, out_dir / PAIRS_FILE)
    if stats_report is not None:
        manifest.write_stats_report(stats_report, out_dir / STATS_FILE)
        _write_ecdf_dumps(stats_report, out_dir)
    manifest.save_state(state, state_path)

    for message in warnings:
        log.warning("%s", message)
    return PipelineResult(
        state=state,
        out_dir=out_dir,
        pending=len(state.pending_ids()),
        warnings=warnings,
    )


def _load_prior_decisions(state_path: Path):
    if not state_path.exists():
        return {}
    previous = manifest.load_state(state_path)
    return {
        o.snowy_id: o.decision
        for o in previous.outcomes
        if o.decision is not None and o.decision.decided_by == "human"
    }


def _annotation_stats(config: RunConfig, data_dir: Path, corpus: manifest.Corpus):
    """Optional statistics when an annotations file accompanies the data."""
    path = data_dir / manifest.ANNOTATIONS_FILE
    if not path.exists():
        return {}, None, []
    warnings: list[str] = []
    records = manifest.read_annotations(path)
    known = [r for r in records if r.sequence_id in corpus.domains]
    skipped = len(records) - len(known)
    if skipped:
        warnings.append(f"{skipped} annotation(s) reference unknown sequences; skipped")

    by_sequence: dict[str, set[str]] = {}
    for rec in known:
        by_sequence.setdefault(rec.sequence_id, set()).add(rec.object_id)
    road_users = {sid: len(objs) for sid, objs in sorted(by_sequence.items())}

    snowy = [r for r in known if corpus.domains[r.sequence_id] == DOMAIN_SNOWY]
    clear = [r for r in known if corpus.domains[r.sequence_id] == DOMAIN_CLEAR]
    if not snowy or not clear:
        warnings.append("annotations cover only one domain; skipping the stats report")
        return road_users, None, warnings
    from .stats import distribution_report

    report = distribution_report(snowy, clear, speed_threshold=config.speed_threshold)
    return road_users, report, warnings


def _write_ecdf_dumps(report, out_dir: Path) -> None:
    curves = {
        "point_count": (report.snowy.point_count_ecdf, report.clear.point_count_ecdf),
        "objects_per_frame": (
            report.snowy.objects_per_frame_ecdf,
            report.clear.objects_per_frame_ecdf,
        ),
        "track_speed": (report.snowy.speed_ecdf, report.clear.speed_ecdf),
    }
    for name, (snowy_curve, clear_curve) in curves.items():
        for domain, curve in ((DOMAIN_SNOWY, snowy_curve), (DOMAIN_CLEAR, clear_curve)):
            if curve is not None:
                manifest.write_ecdf(curve, out_dir / f"ecdf_{name}_{domain}.txt")
