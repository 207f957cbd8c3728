"""Command-line driver for the pairing pipeline.

Usage:
    trajpair pipeline run --data-dir data/ --out-dir out/ [--config cfg.json]
    trajpair review serve --state out/state.json [--bind 127.0.0.1:8787]
    trajpair splits generate --state out/state.json --fraction-snowy 0.5 --out-dir out/

Exit codes: 0 on success, 1 on any input or data error, 3 when matches
are still pending human review.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import manifest
from .config import RunConfig, load_config
from .errors import TrajPairError
from .pipeline import run_pipeline
from .review import ReviewSession, make_server
from .splits import (
    DOMAIN_CLEAR,
    DOMAIN_SNOWY,
    LabelPlan,
    MIX_FRACTIONS,
    ROLE_TRAIN,
    ROLE_VALIDATION,
    fractional_split,
    mix_splits,
    sparse_plan,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_REVIEW_PENDING = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trajpair", description=__doc__)
    top = parser.add_subparsers(dest="group", required=True)

    pipeline = top.add_parser("pipeline", help="matching pipeline")
    pipeline_sub = pipeline.add_subparsers(dest="command", required=True)
    run = pipeline_sub.add_parser("run", help="ingest, match and pair one data directory")
    run.add_argument("--config", help="JSON config file (defaults apply when omitted)")
    run.add_argument("--data-dir", required=True)
    run.add_argument("--out-dir", required=True)
    run.add_argument("--state", help="state file path (default: <out-dir>/state.json)")

    review = top.add_parser("review", help="human review service")
    review_sub = review.add_subparsers(dest="command", required=True)
    serve = review_sub.add_parser("serve", help="serve the review API and UI")
    serve.add_argument("--state", required=True)
    serve.add_argument("--bind", default="127.0.0.1:8787", help="host:port to listen on")
    serve.add_argument("--data-dir", help="override the data directory recorded in the state")
    serve.add_argument("--ui-dir", help="directory with the built review UI to serve at /")

    splits = top.add_parser("splits", help="label split manifests")
    splits_sub = splits.add_subparsers(dest="command", required=True)
    generate = splits_sub.add_parser("generate", help="emit a mixed split manifest")
    generate.add_argument("--state", required=True)
    generate.add_argument("--fraction-snowy", required=True, type=float)
    generate.add_argument("--out-dir", required=True)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.group == "pipeline":
            return _cmd_pipeline_run(args)
        if args.group == "review":
            return _cmd_review_serve(args)
        if args.group == "splits":
            return _cmd_splits_generate(args)
    except TrajPairError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


def _cmd_pipeline_run(args) -> int:
    config = load_config(args.config) if args.config else RunConfig()
    result = run_pipeline(config, args.data_dir, args.out_dir, state_path=args.state)
    outcomes = result.state.outcomes
    auto = sum(1 for o in outcomes if o.status == "auto_matched")
    matched = sum(1 for o in outcomes if o.status == "matched")
    unmatched = sum(1 for o in outcomes if o.status == "unmatched" and o.decision is None)
    print(
        f"matched {auto} automatically, {matched} by prior decision; "
        f"{unmatched} unmatched; outputs in {result.out_dir}"
    )
    if result.pending:
        print(f"{result.pending} match(es) pending review")
        return EXIT_REVIEW_PENDING
    return EXIT_OK


def _cmd_review_serve(args) -> int:
    host, _, port_text = args.bind.partition(":")
    try:
        port = int(port_text) if port_text else 8787
    except ValueError:
        print(f"error: invalid bind address {args.bind!r}", file=sys.stderr)
        return EXIT_ERROR
    session = ReviewSession(args.state, data_dir=args.data_dir)
    try:
        server = make_server(session, host or "127.0.0.1", port, ui_dir=args.ui_dir)
    except OSError as exc:
        print(f"error: cannot bind {args.bind}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    host, port = server.server_address[:2]
    print(f"review service on http://{host}:{port}/ ({len(session.state.pending_ids())} pending)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def _cmd_splits_generate(args) -> int:
    fraction = args.fraction_snowy
    if fraction not in MIX_FRACTIONS:
        print(
            f"error: unsupported fraction {fraction}; expected one of {MIX_FRACTIONS}",
            file=sys.stderr,
        )
        return EXIT_ERROR
    state = manifest.load_state(args.state)
    pending = state.pending_ids()
    if pending:
        print(f"error: {len(pending)} match(es) still pending review", file=sys.stderr)
        return EXIT_REVIEW_PENDING

    snowy_train, clear_train, validation = plans_for_state(state, fraction)
    mixed = mix_splits(snowy_train, clear_train, fraction)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"splits_{fraction!r}.txt"
    manifest.write_split_manifest(mixed, validation, state.pairs, out_path)

    by_domain = mixed.labels_by_domain
    print(
        f"wrote {out_path}: {by_domain[DOMAIN_SNOWY]} snowy + {by_domain[DOMAIN_CLEAR]} clear "
        f"train labels (reference {mixed.reference_labels}, "
        f"within tolerance: {mixed.within_tolerance})"
    )
    return EXIT_OK


def plans_for_state(state: manifest.RunState, fraction_snowy: float):
    """Label plans for every resolved pair at the requested mixing fraction."""
    stride = state.config.label_stride
    validation_ids = set(state.config.validation_sequences)
    fraction_clear = 1.0 - fraction_snowy

    snowy_train: list[LabelPlan] = []
    clear_train: list[LabelPlan] = []
    validation: list[LabelPlan] = []
    for outcome in sorted(state.outcomes, key=lambda o: o.snowy_id):
        if outcome.decision is None:
            continue
        pair = state.pairs.get(outcome.snowy_id)
        if pair is None:
            raise TrajPairError(f"{outcome.snowy_id}: resolved match has no pair manifest")
        snowy_len = state.frame_counts[outcome.snowy_id]
        clear_len = pair.frame_count
        if outcome.snowy_id in validation_ids:
            validation.append(
                _plan(outcome.snowy_id, DOMAIN_SNOWY, snowy_len, stride,
                      tuple(range(snowy_len)), ROLE_VALIDATION, 1.0, None)
            )
            validation.append(
                _plan(pair.clear_id, DOMAIN_CLEAR, clear_len, stride,
                      tuple(range(clear_len)), ROLE_VALIDATION, 1.0, outcome.snowy_id)
            )
            continue
        if fraction_snowy > 0.0:
            base = sparse_plan(snowy_len, stride)
            snowy_train.append(
                _plan(outcome.snowy_id, DOMAIN_SNOWY, snowy_len, stride,
                      tuple(fractional_split(base, fraction_snowy)),
                      ROLE_TRAIN, fraction_snowy, None)
            )
        if fraction_clear > 0.0:
            base = sparse_plan(clear_len, stride)
            clear_train.append(
                _plan(pair.clear_id, DOMAIN_CLEAR, clear_len, stride,
                      tuple(fractional_split(base, fraction_clear)),
                      ROLE_TRAIN, fraction_clear, outcome.snowy_id)
            )
    return snowy_train, clear_train, validation


def _plan(sequence_id, domain, seq_len, stride, indices, role, fraction, pair_snowy_id):
    return LabelPlan(
        sequence_id=sequence_id,
        domain=domain,
        seq_len=seq_len,
        stride=stride,
        labelled_indices=indices,
        role=role,
        fraction=fraction,
        pair_snowy_id=pair_snowy_id,
    )


if __name__ == "__main__":
    sys.exit(main())
