"""Sparse label plans and fractional/mixed training splits.

Training sequences are labelled at the first frame and every
``stride``-th frame after it.  A fractional split keeps a subset of
those labels by position in the labelled list: 0.5 keeps every second
one, 0.25 every fourth, and 0.75 drops every fourth, always counting
from the first label so the first frame stays in every split.  Mixed
manifests combine a snowy fraction f with the clear fraction 1 - f and
should land within 10% of the label count of a pure split.

Pure functions; parallel per sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidInputError

DOMAIN_SNOWY = "snowy"
DOMAIN_CLEAR = "clear"

ROLE_TRAIN = "train"
ROLE_VALIDATION = "validation"

SUPPORTED_FRACTIONS = (0.25, 0.5, 0.75, 1.0)
MIX_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)

MIX_TOLERANCE = 0.10


@dataclass(frozen=True)
class LabelPlan:
    """Frames of one sequence selected for labelling.

    Indices are ordinals into the sequence the plan is for.  Clear plans
    are built over a paired, sampled subsequence; ``pair_snowy_id`` names
    the pair so ordinals can be mapped back to recording frame indices.
    """

    sequence_id: str
    domain: str
    seq_len: int
    stride: int
    labelled_indices: tuple[int, ...]
    role: str = ROLE_TRAIN
    fraction: float = 1.0
    pair_snowy_id: str | None = None

    def __post_init__(self):
        idx = tuple(int(i) for i in self.labelled_indices)
        object.__setattr__(self, "labelled_indices", idx)
        if self.domain not in (DOMAIN_SNOWY, DOMAIN_CLEAR):
            raise InvalidInputError(f"unknown domain {self.domain!r}")
        if self.role not in (ROLE_TRAIN, ROLE_VALIDATION):
            raise InvalidInputError(f"unknown role {self.role!r}")
        if idx and (idx[0] < 0 or idx[-1] >= self.seq_len):
            raise InvalidInputError(
                f"{self.sequence_id}: labelled indices outside [0, {self.seq_len})"
            )
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise InvalidInputError(f"{self.sequence_id}: indices must be strictly increasing")
        if self.role == ROLE_VALIDATION and idx != tuple(range(self.seq_len)):
            raise InvalidInputError(f"{self.sequence_id}: validation plans label every frame")

    @property
    def label_count(self) -> int:
        return len(self.labelled_indices)

    def full_sparse_count(self) -> int:
        """Label count this sequence would have in a pure (1.0) split."""
        if self.role == ROLE_VALIDATION:
            return self.seq_len
        return len(sparse_plan(self.seq_len, self.stride))

    def to_jsonable(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "domain": self.domain,
            "seq_len": self.seq_len,
            "stride": self.stride,
            "labelled_indices": list(self.labelled_indices),
            "role": self.role,
            "fraction": self.fraction,
            "pair_snowy_id": self.pair_snowy_id,
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "LabelPlan":
        return cls(
            sequence_id=data["sequence_id"],
            domain=data["domain"],
            seq_len=int(data["seq_len"]),
            stride=int(data["stride"]),
            labelled_indices=tuple(data["labelled_indices"]),
            role=data["role"],
            fraction=float(data["fraction"]),
            pair_snowy_id=data.get("pair_snowy_id"),
        )


def sparse_plan(seq_len: int, stride: int = 10) -> list[int]:
    """Indices of the first frame and every ``stride``-th frame after it."""
    if seq_len < 1:
        raise InvalidInputError(f"seq_len must be >= 1, got {seq_len}")
    if stride < 1:
        raise InvalidInputError(f"stride must be >= 1, got {stride}")
    return list(range(0, seq_len, stride))


def fractional_split(labelled, fraction: float) -> list[int]:
    """Keep a positional subset of an ordered labelled-frame list."""
    labelled = list(labelled)
    if not labelled:
        raise InvalidInputError("labelled list must be non-empty")
    if fraction == 1.0:
        return labelled
    if fraction == 0.5:
        return labelled[0::2]
    if fraction == 0.25:
        return labelled[0::4]
    if fraction == 0.75:
        return [v for pos, v in enumerate(labelled) if pos % 4 != 3]
    raise InvalidInputError(
        f"unsupported fraction {fraction}; expected one of {SUPPORTED_FRACTIONS}"
    )


@dataclass(frozen=True)
class MixedSplit:
    """Concatenated snowy/clear training plans for one mixing fraction."""

    fraction_snowy: float
    plans: tuple[LabelPlan, ...]
    total_labels: int
    reference_labels: int
    within_tolerance: bool

    @property
    def labels_by_domain(self) -> dict[str, int]:
        out = {DOMAIN_SNOWY: 0, DOMAIN_CLEAR: 0}
        for plan in self.plans:
            out[plan.domain] += plan.label_count
        return out


def mix_splits(
    snowy_plans: list[LabelPlan],
    clear_plans: list[LabelPlan],
    fraction_snowy: float,
) -> MixedSplit:
    """Combine snowy plans at fraction f with clear plans at 1 - f.

    The total label count is checked against the pure-split reference:
    the count a fraction-1.0 labelling of the snowy side would have (of
    the clear side for f = 0).  Plans must carry matching fractions and
    be derived with one common stride.
    """
    if fraction_snowy not in MIX_FRACTIONS:
        raise InvalidInputError(
            f"unsupported fraction_snowy {fraction_snowy}; expected one of {MIX_FRACTIONS}"
        )
    fraction_clear = 1.0 - fraction_snowy
    _check_fractions(snowy_plans, fraction_snowy, DOMAIN_SNOWY)
    _check_fractions(clear_plans, fraction_clear, DOMAIN_CLEAR)
    strides = {p.stride for p in snowy_plans} | {p.stride for p in clear_plans}
    if len(strides) > 1:
        raise InvalidInputError(f"plans mix different strides: {sorted(strides)}")

    plans = tuple(
        sorted(snowy_plans + clear_plans, key=lambda p: (p.domain, p.sequence_id))
    )
    total = sum(p.label_count for p in plans)
    reference_side = snowy_plans if fraction_snowy > 0.0 else clear_plans
    reference = sum(p.full_sparse_count() for p in reference_side)
    if reference == 0:  # no training pairs at all; an empty manifest is fine
        within = total == 0
    else:
        within = abs(total - reference) <= MIX_TOLERANCE * reference + 1e-9
    return MixedSplit(fraction_snowy, plans, total, reference, within)


def _check_fractions(plans: list[LabelPlan], fraction: float, domain: str) -> None:
    if fraction == 0.0:
        if plans:
            raise InvalidInputError(
                f"{domain} plans supplied but {domain} fraction is 0.0"
            )
        return
    for plan in plans:
        if plan.domain != domain:
            raise InvalidInputError(
                f"{plan.sequence_id}: expected domain {domain}, got {plan.domain}"
            )
        if plan.fraction != fraction:
            raise InvalidInputError(
                f"{plan.sequence_id}: plan fraction {plan.fraction} != expected {fraction} "
                f"(snowy and clear fractions must sum to 1)"
            )
