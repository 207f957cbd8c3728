"""Candidate selection and tiered matching of clear sequences to snowy ones.

For a snowy sequence s the argmax of coverage at each threshold, the
union of those argmax winners with nonzero coverage (the candidate set),
and the set of thresholds at which one clear sequence wins (its
consistency) drive a five-tier refinement.  The match is chosen from the
first nonempty tier; a singleton resolves automatically while ties go to
a human reviewer.

Selection per snowy sequence is independent and parallelizable.
Decisions never mutate an outcome in place: ``apply_decision`` returns a
new outcome, so a single writer per snowy id suffices.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Mapping

from .coverage import CoverageTable
from .errors import DecisionConflictError, InvalidDecisionError

STATUS_AUTO_MATCHED = "auto_matched"
STATUS_NEEDS_REVIEW = "needs_review"
STATUS_UNMATCHED = "unmatched"
STATUS_MATCHED = "matched"

FULL_COVERAGE = 1.0
GOOD_COVERAGE = 0.95


@dataclass(frozen=True)
class Decision:
    clear_id: str
    decided_by: str  # "auto" or "human"
    note: str = ""
    decided_at: str | None = None  # ISO timestamp; None for auto decisions


@dataclass(frozen=True)
class CandidateInfo:
    """One clear sequence offered for a snowy sequence."""

    clear_id: str
    coverages: tuple[float, ...]  # aligned with the table's thresholds
    d_max: float | None


@dataclass(frozen=True)
class MatchOutcome:
    snowy_id: str
    tier: int | None
    candidates: tuple[CandidateInfo, ...]
    status: str
    decision: Decision | None = None

    @property
    def resolved(self) -> bool:
        return self.decision is not None


def best_clear(table: CoverageTable, snowy_id: str, theta: float) -> set[str]:
    """Clear sequences with the greatest coverage of ``snowy_id`` at ``theta``.

    All ties are kept.  When every coverage is zero the argmax is the
    whole clear set.
    """
    fractions = {cid: table.get(snowy_id, cid, theta) for cid in table.clear_ids}
    top = max(fractions.values())
    return {cid for cid, f in fractions.items() if f == top}


def candidate_set(table: CoverageTable, snowy_id: str) -> set[str]:
    """Union over thresholds of argmax winners with nonzero coverage."""
    out: set[str] = set()
    for theta in table.thetas:
        for cid in best_clear(table, snowy_id, theta):
            if table.get(snowy_id, cid, theta) > 0.0:
                out.add(cid)
    return out


def consistency(table: CoverageTable, snowy_id: str, clear_id: str) -> tuple[float, ...]:
    """Thresholds at which ``clear_id`` is a nonzero-coverage argmax winner."""
    return tuple(
        theta
        for theta in table.thetas
        if clear_id in best_clear(table, snowy_id, theta)
        and table.get(snowy_id, clear_id, theta) > 0.0
    )


DmaxLookup = Callable[[str, str], float | None]


def tiered_select(
    table: CoverageTable,
    snowy_id: str,
    *,
    dmax_of: DmaxLookup | Mapping[tuple[str, str], float] | None = None,
) -> MatchOutcome:
    """Pick the match for one snowy sequence from the first nonempty tier.

    Tiers over the candidate set C*: (1) full coverage at the smallest
    threshold, (2) coverage >= 0.95 at some threshold, (3) C* itself when
    it is a singleton, (4) members winning at more than one threshold,
    (5) C*.  An empty C* is unmatched.  ``dmax_of`` supplies the pairing
    discrepancy recorded per candidate (and used as a sort key).
    """
    lookup = _as_lookup(dmax_of)
    cstar = candidate_set(table, snowy_id)
    if not cstar:
        return MatchOutcome(snowy_id, None, (), STATUS_UNMATCHED)

    theta_min = table.thetas.min
    tiers = [
        {c for c in cstar if table.get(snowy_id, c, theta_min) == FULL_COVERAGE},
        {
            c
            for c in cstar
            if any(table.get(snowy_id, c, t) >= GOOD_COVERAGE for t in table.thetas)
        },
        cstar if len(cstar) == 1 else set(),
        {c for c in cstar if len(consistency(table, snowy_id, c)) > 1},
        cstar,
    ]
    tier, chosen = next(
        (rank, members) for rank, members in enumerate(tiers, start=1) if members
    )

    infos = [
        CandidateInfo(cid, table.fractions(snowy_id, cid), lookup(snowy_id, cid))
        for cid in chosen
    ]
    infos.sort(
        key=lambda ci: (
            -max(ci.coverages),
            ci.d_max if ci.d_max is not None else float("inf"),
            ci.clear_id,
        )
    )
    if len(infos) == 1:
        decision = Decision(infos[0].clear_id, decided_by="auto")
        return MatchOutcome(snowy_id, tier, tuple(infos), STATUS_AUTO_MATCHED, decision)
    return MatchOutcome(snowy_id, tier, tuple(infos), STATUS_NEEDS_REVIEW)


def _as_lookup(dmax_of) -> DmaxLookup:
    if dmax_of is None:
        return lambda s, c: None
    if isinstance(dmax_of, Mapping):
        return lambda s, c: dmax_of.get((s, c))
    return dmax_of


def apply_decision(
    outcome: MatchOutcome,
    clear_id: str,
    note: str = "",
    *,
    known_clear_ids=None,
    decided_at: str | None = None,
) -> MatchOutcome:
    """Record a human decision on a pending outcome.

    For needs_review the choice must be one of the offered candidates;
    for unmatched any known clear sequence is allowed.  Re-applying the
    same choice is a no-op; a different choice on a decided outcome is a
    conflict.  The original tier is preserved.
    """
    if outcome.decision is not None:
        if outcome.decision.clear_id == clear_id:
            return outcome
        raise DecisionConflictError(
            f"{outcome.snowy_id}: already decided for {outcome.decision.clear_id!r}"
        )
    if outcome.status == STATUS_NEEDS_REVIEW:
        offered = {ci.clear_id for ci in outcome.candidates}
        if clear_id not in offered:
            raise InvalidDecisionError(
                f"{outcome.snowy_id}: {clear_id!r} is not among the candidates"
            )
    elif outcome.status == STATUS_UNMATCHED:
        if known_clear_ids is not None and clear_id not in set(known_clear_ids):
            raise InvalidDecisionError(
                f"{outcome.snowy_id}: {clear_id!r} is not a known clear sequence"
            )
    else:
        raise InvalidDecisionError(
            f"{outcome.snowy_id}: status {outcome.status!r} does not accept decisions"
        )
    decision = Decision(clear_id, decided_by="human", note=note, decided_at=decided_at)
    return replace(outcome, status=STATUS_MATCHED, decision=decision)
