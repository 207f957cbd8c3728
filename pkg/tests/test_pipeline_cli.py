import json

import pytest

from trajpair.cli import EXIT_ERROR, EXIT_OK, EXIT_REVIEW_PENDING, main
from trajpair.manifest import load_state

from conftest import make_basic_corpus


def run_cli(*args) -> int:
    return main([str(a) for a in args])


OUTPUT_FILES = ("coverage.txt", "matches.txt", "pairs.txt", "state.json")


def test_perfect_overlap_auto_matches(tmp_path, basic_corpus, capsys):
    out = tmp_path / "out"
    code = run_cli("pipeline", "run", "--data-dir", basic_corpus, "--out-dir", out)
    assert code == EXIT_OK
    for name in OUTPUT_FILES:
        assert (out / name).exists()
    state = load_state(out / "state.json")
    assert state.outcomes[0].status == "auto_matched"
    assert state.outcomes[0].tier == 1
    assert "snowy_a" in state.pairs
    pairs_text = (out / "pairs.txt").read_text(encoding="utf-8")
    assert "pair snowy_a clear=clear_a" in pairs_text


def test_tied_candidates_exit_review_pending(tmp_path, review_corpus, capsys):
    out = tmp_path / "out"
    code = run_cli("pipeline", "run", "--data-dir", review_corpus, "--out-dir", out)
    assert code == EXIT_REVIEW_PENDING
    assert "2 match(es) pending review" in capsys.readouterr().out
    matches = (out / "matches.txt").read_text(encoding="utf-8")
    assert "match snowy_b tier=2 status=needs_review" in matches
    assert "match snowy_far tier=none status=unmatched" in matches


def test_missing_data_dir_fails_without_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = run_cli("pipeline", "run", "--data-dir", tmp_path / "nope", "--out-dir", out)
    assert code == EXIT_ERROR
    assert not out.exists()
    assert "error" in capsys.readouterr().err


def test_rerun_is_byte_identical(tmp_path, review_corpus):
    out = tmp_path / "out"
    assert run_cli("pipeline", "run", "--data-dir", review_corpus, "--out-dir", out) in (
        EXIT_OK,
        EXIT_REVIEW_PENDING,
    )
    first = {name: (out / name).read_bytes() for name in OUTPUT_FILES}
    assert run_cli("pipeline", "run", "--data-dir", review_corpus, "--out-dir", out) in (
        EXIT_OK,
        EXIT_REVIEW_PENDING,
    )
    second = {name: (out / name).read_bytes() for name in OUTPUT_FILES}
    assert first == second


def test_config_file_controls_thresholds(tmp_path, basic_corpus):
    out = tmp_path / "out"
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"thetas": [1.0, 6.0], "delta_d": 2.0}), encoding="utf-8")
    code = run_cli(
        "pipeline", "run", "--config", config_path, "--data-dir", basic_corpus, "--out-dir", out
    )
    assert code == EXIT_OK
    state = load_state(out / "state.json")
    assert state.config.thetas == (1.0, 6.0)
    assert state.config.delta_d == 2.0


def test_invalid_config_rejected(tmp_path, basic_corpus, capsys):
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"thetas": [8.0, 2.0]}), encoding="utf-8")
    code = run_cli(
        "pipeline",
        "run",
        "--config",
        config_path,
        "--data-dir",
        basic_corpus,
        "--out-dir",
        tmp_path / "out",
    )
    assert code == EXIT_ERROR


def test_stats_written_when_annotations_present(tmp_path, basic_corpus):
    annotations = "\n".join(
        [
            "annotations v1",
            "snowy_a,0,car1,car,1.0,0.0,0.5,40,0.0",
            "snowy_a,1,car1,car,2.0,0.0,0.5,42,0.1",
            "clear_a,0,car7,car,1.0,0.0,0.5,55,0.0",
            "clear_a,1,car7,car,2.5,0.0,0.5,50,0.1",
        ]
    )
    (basic_corpus / "annotations.txt").write_text(annotations + "\n", encoding="utf-8")
    out = tmp_path / "out"
    assert run_cli("pipeline", "run", "--data-dir", basic_corpus, "--out-dir", out) == EXIT_OK
    assert (out / "stats.txt").exists()
    assert (out / "ecdf_point_count_snowy.txt").exists()
    state = load_state(out / "state.json")
    assert state.road_users == {"clear_a": 1, "snowy_a": 1}


# ---------------------------------------------------------------------------
# splits generate


def test_splits_refused_while_pending(tmp_path, review_corpus, capsys):
    out = tmp_path / "out"
    run_cli("pipeline", "run", "--data-dir", review_corpus, "--out-dir", out)
    code = run_cli(
        "splits",
        "generate",
        "--state",
        out / "state.json",
        "--fraction-snowy",
        "0.5",
        "--out-dir",
        out,
    )
    assert code == EXIT_REVIEW_PENDING
    assert "pending" in capsys.readouterr().err


def test_splits_unsupported_fraction(tmp_path, basic_corpus, capsys):
    out = tmp_path / "out"
    run_cli("pipeline", "run", "--data-dir", basic_corpus, "--out-dir", out)
    code = run_cli(
        "splits",
        "generate",
        "--state",
        out / "state.json",
        "--fraction-snowy",
        "0.3",
        "--out-dir",
        out,
    )
    assert code == EXIT_ERROR
    assert "unsupported fraction" in capsys.readouterr().err


@pytest.mark.parametrize(
    "fraction,snowy_labels,clear_labels",
    [("1.0", 10, 0), ("0.5", 5, 5), ("0.25", 3, 8), ("0.0", 0, 10)],
)
def test_splits_label_counts(tmp_path, basic_corpus, fraction, snowy_labels, clear_labels):
    out = tmp_path / "out"
    assert run_cli("pipeline", "run", "--data-dir", basic_corpus, "--out-dir", out) == EXIT_OK
    code = run_cli(
        "splits",
        "generate",
        "--state",
        out / "state.json",
        "--fraction-snowy",
        fraction,
        "--out-dir",
        out,
    )
    assert code == EXIT_OK
    manifest_path = out / f"splits_{float(fraction)!r}.txt"
    text = manifest_path.read_text(encoding="utf-8").splitlines()
    assert text[0].startswith("splits v1 fraction_snowy=")
    snowy_rows = [l for l in text if l.startswith("snowy,")]
    clear_rows = [l for l in text if l.startswith("clear,")]
    # one 100-frame snowy pair and a 100-frame sampled clear side
    assert len(snowy_rows) == snowy_labels
    assert len(clear_rows) == clear_labels
    assert any("within_tolerance=true" in l for l in text)


def test_splits_pure_snowy_equals_sparse_plan(tmp_path, basic_corpus):
    out = tmp_path / "out"
    run_cli("pipeline", "run", "--data-dir", basic_corpus, "--out-dir", out)
    run_cli(
        "splits", "generate", "--state", out / "state.json", "--fraction-snowy", "1.0",
        "--out-dir", out,
    )
    rows = [
        line
        for line in (out / "splits_1.0.txt").read_text(encoding="utf-8").splitlines()
        if line.startswith("snowy,")
    ]
    assert rows == [f"snowy,snowy_a,{i}" for i in range(0, 100, 10)]


def test_splits_clear_rows_use_recording_indices(tmp_path, basic_corpus):
    out = tmp_path / "out"
    run_cli("pipeline", "run", "--data-dir", basic_corpus, "--out-dir", out)
    run_cli(
        "splits", "generate", "--state", out / "state.json", "--fraction-snowy", "0.0",
        "--out-dir", out,
    )
    state = load_state(out / "state.json")
    pair = state.pairs["snowy_a"]
    rows = [
        line
        for line in (out / "splits_0.0.txt").read_text(encoding="utf-8").splitlines()
        if line.startswith("clear,")
    ]
    expected = [
        f"clear,clear_a,{pair.clear_frame_indices[ordinal]}"
        for ordinal in range(0, pair.frame_count, 10)
    ]
    assert rows == expected


def test_validation_sequences_fully_labelled(tmp_path):
    data_dir = tmp_path / "data"
    make_basic_corpus(data_dir, with_second=True)
    out = tmp_path / "out"
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({"validation_sequences": ["snowy_a"]}), encoding="utf-8")
    run_cli(
        "pipeline", "run", "--config", config_path, "--data-dir", data_dir, "--out-dir", out
    )
    code = run_cli(
        "splits", "generate", "--state", out / "state.json", "--fraction-snowy", "0.5",
        "--out-dir", out,
    )
    assert code == EXIT_OK
    text = (out / "splits_0.5.txt").read_text(encoding="utf-8").splitlines()
    validation_start = text.index("section validation")
    train_rows = [
        l for l in text[:validation_start] if l.startswith(("snowy,", "clear,"))
    ]
    validation_rows = [
        l for l in text[validation_start:] if l.startswith(("snowy,", "clear,"))
    ]
    state = load_state(out / "state.json")
    pair_a = state.pairs["snowy_a"]
    pair_c = state.pairs["snowy_c"]
    # validation pair fully labelled on both sides; training pair mixed
    assert len(validation_rows) == 100 + pair_a.frame_count
    assert all(",snowy_a," in l or ",clear_a," in l for l in validation_rows)
    expected_clear = len(range(0, pair_c.frame_count, 10))  # sparse labels on the clear side
    assert len(train_rows) == 5 + (expected_clear + 1) // 2
    assert all(",snowy_c," in l or ",clear_c," in l for l in train_rows)
