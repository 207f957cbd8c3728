"""Service-side contract tests for the review API (no UI involved)."""

import json
import threading
import urllib.error
import urllib.request
from contextlib import contextmanager

import pytest

from trajpair.cli import EXIT_OK, main as cli_main
from trajpair.config import RunConfig
from trajpair.manifest import load_state
from trajpair.pipeline import run_pipeline
from trajpair.review import ReviewSession, downsample_polyline, make_server

import numpy as np


@pytest.fixture
def served_state(tmp_path, review_corpus):
    out = tmp_path / "out"
    run_pipeline(RunConfig(), review_corpus, out)
    return out / "state.json"


@contextmanager
def serve(state_path, data_dir=None):
    session = ReviewSession(state_path, data_dir=data_dir)
    server = make_server(session, "127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        server.server_close()
        thread.join(timeout=5)


def get_json(base, path):
    with urllib.request.urlopen(base + path) as response:
        return response.status, json.loads(response.read())


def post_json(base, path, payload):
    request = urllib.request.Request(
        base + path,
        data=json.dumps(payload).encode("utf-8"),
        headers={"Content-Type": "application/json"},
        method="POST",
    )
    try:
        with urllib.request.urlopen(request) as response:
            return response.status, json.loads(response.read())
    except urllib.error.HTTPError as err:
        return err.code, json.loads(err.read())


def test_state_and_pending_listing(served_state):
    with serve(served_state) as base:
        status, summary = get_json(base, "/api/state")
        assert status == 200
        assert summary["counts"]["snowy"] == 3
        assert summary["counts"]["pending"] == 2
        assert summary["counts"]["auto_matched"] == 1
        assert "clear_up" in summary["clear_ids"]
        # every sequence is listed with its domain tag
        assert summary["sequences"]["snowy_b"] == "snowy"
        assert summary["sequences"]["clear_down"] == "clear"
        assert len(summary["sequences"]) == 6

        status, pending = get_json(base, "/api/pending")
        assert status == 200
        listed = {entry["snowy_id"]: entry for entry in pending["pending"]}
        assert set(listed) == {"snowy_b", "snowy_far"}
        assert listed["snowy_b"]["status"] == "needs_review"
        assert listed["snowy_b"]["candidate_count"] == 2
        assert listed["snowy_far"]["status"] == "unmatched"


def test_pair_payload_contains_geometry(served_state):
    with serve(served_state) as base:
        status, pair = get_json(base, "/api/pair/snowy_b")
        assert status == 200
        assert pair["thetas"] == [2.0, 4.0, 8.0]
        assert len(pair["snowy"]["polyline"]) >= 2
        assert len(pair["candidates"]) == 2
        for candidate in pair["candidates"]:
            assert len(candidate["coverages"]) == 3
            assert len(candidate["polyline"]) <= 2000
            assert candidate["d_max"] is not None
        assert pair["available_clear_ids"] == sorted(pair["available_clear_ids"])

        status, _ = get_json(base, "/api/pair/snowy_b")  # reads are repeatable
        assert status == 200


def test_unknown_pair_is_404(served_state):
    with serve(served_state) as base:
        try:
            urllib.request.urlopen(base + "/api/pair/who")
            raise AssertionError("expected 404")
        except urllib.error.HTTPError as err:
            assert err.code == 404


def test_decision_lifecycle_with_persistence(served_state):
    with serve(served_state) as base:
        status, body = post_json(
            base, "/api/pair/snowy_b/decision", {"clear_id": "clear_up", "note": "same lane"}
        )
        assert status == 200
        assert body["result"] == "accepted"
        assert body["pending"] == 1

        # write-ahead: the state on disk already carries the decision
        persisted = load_state(served_state)
        outcome = persisted.outcome_for("snowy_b")
        assert outcome.status == "matched"
        assert outcome.decision.decided_by == "human"
        assert outcome.decision.note == "same lane"
        assert "snowy_b" in persisted.pairs

        # idempotent repeat of the same choice
        status, body = post_json(
            base, "/api/pair/snowy_b/decision", {"clear_id": "clear_up", "note": ""}
        )
        assert status == 200 and body["result"] == "accepted"

        # conflicting choice is rejected and changes nothing
        status, body = post_json(
            base, "/api/pair/snowy_b/decision", {"clear_id": "clear_down", "note": ""}
        )
        assert status == 409 and body["result"] == "conflict"
        assert body["decision"]["clear_id"] == "clear_up"
        assert load_state(served_state).outcome_for("snowy_b").decision.clear_id == "clear_up"


def test_invalid_candidate_rejected(served_state):
    with serve(served_state) as base:
        status, body = post_json(
            base, "/api/pair/snowy_b/decision", {"clear_id": "clear_a", "note": ""}
        )
        assert status == 400 and body["result"] == "invalid"
        assert load_state(served_state).outcome_for("snowy_b").decision is None

        status, body = post_json(base, "/api/pair/ghost/decision", {"clear_id": "clear_a"})
        assert status == 404

        status, body = post_json(base, "/api/pair/snowy_b/decision", {"note": "no id"})
        assert status == 400


def test_unmatched_accepts_any_known_clear(served_state):
    with serve(served_state) as base:
        status, body = post_json(
            base, "/api/pair/snowy_far/decision", {"clear_id": "clear_a", "note": "fallback"}
        )
        assert status == 200 and body["result"] == "accepted"
        persisted = load_state(served_state)
        outcome = persisted.outcome_for("snowy_far")
        assert outcome.tier is None
        assert outcome.status == "matched"
        assert "snowy_far" in persisted.pairs

        status, body = post_json(
            base, "/api/pair/snowy_far/decision", {"clear_id": "imaginary"}
        )
        assert status in (400, 409)


def test_decisions_survive_restart(served_state):
    with serve(served_state) as base:
        post_json(base, "/api/pair/snowy_b/decision", {"clear_id": "clear_down", "note": ""})
    # a brand-new service instance over the same state file
    with serve(served_state) as base:
        _, pending = get_json(base, "/api/pending")
        ids = {entry["snowy_id"] for entry in pending["pending"]}
        assert "snowy_b" not in ids
        _, pair = get_json(base, "/api/pair/snowy_b")
        assert pair["decision"]["clear_id"] == "clear_down"


def test_decisions_feed_splits_without_rerun(served_state, tmp_path):
    with serve(served_state) as base:
        post_json(base, "/api/pair/snowy_b/decision", {"clear_id": "clear_up"})
        post_json(base, "/api/pair/snowy_far/decision", {"clear_id": "clear_a"})
        # while the service is still running the state file is already usable
        code = cli_main(
            [
                "splits",
                "generate",
                "--state",
                str(served_state),
                "--fraction-snowy",
                "0.5",
                "--out-dir",
                str(tmp_path / "splits"),
            ]
        )
        assert code == EXIT_OK


def test_pipeline_rerun_preserves_human_decisions(served_state, tmp_path, review_corpus):
    with serve(served_state) as base:
        post_json(
            base, "/api/pair/snowy_b/decision", {"clear_id": "clear_down", "note": "kept"}
        )
    # a later pipeline run over the same data re-applies the stored decision
    out = served_state.parent
    result = run_pipeline(RunConfig(), review_corpus, out)
    outcome = result.state.outcome_for("snowy_b")
    assert outcome.status == "matched"
    assert outcome.decision.clear_id == "clear_down"
    assert outcome.decision.decided_by == "human"
    assert outcome.decision.note == "kept"
    assert "snowy_b" in result.state.pairs
    assert result.pending == 1  # only the unmatched sequence remains


def test_polyline_downsampling_caps_points():
    points = np.column_stack([np.arange(5000.0), np.zeros(5000)])
    thinned = downsample_polyline(points, 2000)
    assert len(thinned) <= 2000
    assert thinned[0] == [0.0, 0.0]
    assert thinned[-1] == [4999.0, 0.0]
    short = downsample_polyline(points[:10], 2000)
    assert len(short) == 10
