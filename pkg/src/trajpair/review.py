"""Local HTTP service hosting the human-inspection step.

Serves pending match outcomes with trajectory geometry to a browser UI
and records decisions.  Decisions are persisted write-ahead: the state
file on disk is updated before the request is acknowledged, so an
accepted decision survives any crash or restart.  Reads are lock-free
snapshots; decision writes are serialized by one lock.
"""

from __future__ import annotations

import json
import logging
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .endpoint import build_pair
from .errors import (
    DecisionConflictError,
    InvalidDecisionError,
    InvalidInputError,
    TrajPairError,
)
from .manifest import RunState, load_state, load_trajectories, outcome_to_jsonable, save_state
from .matcher import apply_decision
from .spatial import SpatialModel, polyline_model

log = logging.getLogger(__name__)

MAX_POLYLINE_POINTS = 2000


def downsample_polyline(points: np.ndarray, max_points: int = MAX_POLYLINE_POINTS):
    """Thin a polyline for transport, always keeping both endpoints."""
    n = len(points)
    if n <= max_points:
        return [[float(x), float(y)] for x, y in points]
    stride = -(-n // max_points)  # ceil
    idx = list(range(0, n, stride))
    idx[-1] = n - 1
    return [[float(points[i, 0]), float(points[i, 1])] for i in idx]


class ReviewSession:
    """Run state plus trajectory geometry behind the review API."""

    def __init__(self, state_path, data_dir=None):
        self.state_path = Path(state_path)
        self.state: RunState = load_state(self.state_path)
        corpus = load_trajectories(data_dir or self.state.data_dir)
        self._trajectories = corpus.trajectories
        self._models: dict[str, SpatialModel] = {}
        self._lock = threading.Lock()

    def _model(self, sequence_id: str) -> SpatialModel:
        model = self._models.get(sequence_id)
        if model is None:
            traj = self._trajectories.get(sequence_id)
            if traj is None:
                raise InvalidInputError(f"no trajectory loaded for {sequence_id!r}")
            model = polyline_model(sequence_id, traj.positions, self.state.config.delta_d)
            self._models[sequence_id] = model
        return model

    def state_summary(self) -> dict:
        outcomes = self.state.outcomes
        return {
            "schema_version": self.state.schema_version,
            "config": self.state.config.to_jsonable(),
            "counts": {
                "snowy": len(self.state.snowy_ids),
                "clear": len(self.state.clear_ids),
                "outcomes": len(outcomes),
                "pending": len(self.state.pending_ids()),
                "auto_matched": sum(1 for o in outcomes if o.status == "auto_matched"),
                "matched": sum(1 for o in outcomes if o.status == "matched"),
                "unmatched": sum(1 for o in outcomes if o.status == "unmatched"),
            },
            "sequences": dict(sorted(self.state.domains.items())),
            "clear_ids": self.state.clear_ids,
        }

    def pending(self) -> dict:
        entries = [
            {
                "snowy_id": o.snowy_id,
                "tier": o.tier,
                "status": o.status,
                "candidate_count": len(o.candidates),
            }
            for o in self.state.outcomes
            if o.decision is None
        ]
        return {"pending": entries}

    def pair_payload(self, snowy_id: str) -> dict | None:
        outcome = self.state.outcome_for(snowy_id)
        if outcome is None:
            return None
        snowy_model = self._model(snowy_id)
        candidates = []
        for cand in outcome.candidates:
            candidates.append(
                {
                    "clear_id": cand.clear_id,
                    "coverages": list(cand.coverages),
                    "d_max": cand.d_max,
                    "frame_count": self.state.frame_counts.get(cand.clear_id),
                    "road_users": self.state.road_users.get(cand.clear_id),
                    "polyline": downsample_polyline(self._model(cand.clear_id).points),
                }
            )
        payload = outcome_to_jsonable(outcome)
        payload.update(
            {
                "thetas": list(self.state.config.thetas),
                "snowy": {
                    "polyline": downsample_polyline(snowy_model.points),
                    "frame_count": self.state.frame_counts.get(snowy_id),
                    "road_users": self.state.road_users.get(snowy_id),
                },
                "candidates": candidates,
                "available_clear_ids": self.state.clear_ids,
            }
        )
        return payload

    def decide(self, snowy_id: str, clear_id: str, note: str) -> tuple[str, dict]:
        """Apply one decision; returns (kind, payload) with kind in
        accepted | invalid | conflict | unknown."""
        with self._lock:
            outcome = self.state.outcome_for(snowy_id)
            if outcome is None:
                return "unknown", {"reason": f"unknown snowy sequence {snowy_id!r}"}
            try:
                decided = apply_decision(
                    outcome,
                    clear_id,
                    note,
                    known_clear_ids=self.state.clear_ids,
                    decided_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                )
            except InvalidDecisionError as exc:
                return "invalid", {"reason": str(exc)}
            except DecisionConflictError:
                return "conflict", {"decision": outcome_to_jsonable(outcome)["decision"]}
            if decided is outcome:  # idempotent repeat of the same choice
                return "accepted", {
                    "decision": outcome_to_jsonable(outcome)["decision"],
                    "pending": len(self.state.pending_ids()),
                }

            snowy_traj = self._trajectories.get(snowy_id)
            clear_traj = self._trajectories.get(clear_id)
            if snowy_traj is None or clear_traj is None:
                return "invalid", {"reason": "trajectory data missing for this pair"}
            pair = build_pair(snowy_traj, clear_traj, decided, self.state.config)

            previous_pair = self.state.pairs.get(snowy_id)
            self.state.replace_outcome(decided)
            self.state.pairs[snowy_id] = pair
            try:
                save_state(self.state, self.state_path)
            except Exception:
                self.state.replace_outcome(outcome)
                if previous_pair is None:
                    self.state.pairs.pop(snowy_id, None)
                else:
                    self.state.pairs[snowy_id] = previous_pair
                raise
            return "accepted", {
                "decision": outcome_to_jsonable(decided)["decision"],
                "pending": len(self.state.pending_ids()),
            }


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json; charset=utf-8",
    ".json": "application/json; charset=utf-8",
    ".svg": "image/svg+xml",
}


class ReviewRequestHandler(BaseHTTPRequestHandler):
    session: ReviewSession  # injected by make_server
    ui_dir: Path | None = None

    def do_GET(self):  # noqa: N802 (http.server API)
        path = self.path.split("?", 1)[0]
        if path == "/api/state":
            self._send_json(200, self.session.state_summary())
        elif path == "/api/pending":
            self._send_json(200, self.session.pending())
        elif path.startswith("/api/pair/"):
            snowy_id = path[len("/api/pair/") :]
            payload = self.session.pair_payload(snowy_id)
            if payload is None:
                self._send_json(404, {"reason": f"unknown snowy sequence {snowy_id!r}"})
            else:
                self._send_json(200, payload)
        else:
            self._send_static(path)

    def do_POST(self):  # noqa: N802
        path = self.path.split("?", 1)[0]
        if not (path.startswith("/api/pair/") and path.endswith("/decision")):
            self._send_json(404, {"reason": "unknown endpoint"})
            return
        snowy_id = path[len("/api/pair/") : -len("/decision")]
        try:
            length = int(self.headers.get("Content-Length", "0"))
            body = json.loads(self.rfile.read(length) or b"{}")
            clear_id = body["clear_id"]
            note = str(body.get("note", ""))
        except (ValueError, KeyError) as exc:
            self._send_json(400, {"result": "invalid", "reason": f"bad request body: {exc}"})
            return
        try:
            kind, payload = self.session.decide(snowy_id, str(clear_id), note)
        except TrajPairError as exc:
            self._send_json(400, {"result": "invalid", "reason": str(exc)})
            return
        status = {"accepted": 200, "invalid": 400, "conflict": 409, "unknown": 404}[kind]
        self._send_json(status, {"result": kind, **payload})

    def do_OPTIONS(self):  # noqa: N802
        self.send_response(204)
        self._cors()
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def _send_json(self, status: int, payload: dict) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self._cors()
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _send_static(self, path: str) -> None:
        if self.ui_dir is None:
            if path == "/":
                self._send_json(200, {"service": "trajpair review", "ui": "not configured"})
            else:
                self._send_json(404, {"reason": "not found"})
            return
        relative = "index.html" if path == "/" else path.lstrip("/")
        target = (self.ui_dir / relative).resolve()
        if not str(target).startswith(str(self.ui_dir.resolve())) or not target.is_file():
            self._send_json(404, {"reason": "not found"})
            return
        data = target.read_bytes()
        self.send_response(200)
        self._cors()
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _cors(self) -> None:
        self.send_header("Access-Control-Allow-Origin", "*")

    def log_message(self, fmt, *args):  # route through logging, not stderr
        log.debug("%s %s", self.address_string(), fmt % args)


def make_server(
    session: ReviewSession, host: str = "127.0.0.1", port: int = 8787, ui_dir=None
) -> ThreadingHTTPServer:
    handler = type(
        "BoundReviewHandler",
        (ReviewRequestHandler,),
        {"session": session, "ui_dir": Path(ui_dir) if ui_dir else None},
    )
    return ThreadingHTTPServer((host, port), handler)
