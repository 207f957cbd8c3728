"""Exception types shared across the toolkit."""


class TrajPairError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(TrajPairError):
    """Input violates a precondition (bad coordinates, empty model, ...)."""


class DegenerateModelError(TrajPairError):
    """Trajectory too short to carry even one spacing step.

    Carries the total arc length so the caller can decide how to treat
    near-stationary sequences.
    """

    def __init__(self, arc_length: float):
        super().__init__(
            f"total arc length {arc_length:.6g} m is shorter than the requested spacing"
        )
        self.arc_length = arc_length


class UnknownSequenceError(TrajPairError):
    """A sequence id is missing from a table or run state."""


class InvalidDecisionError(TrajPairError):
    """A review decision names a clear sequence that is not permissible."""


class DecisionConflictError(TrajPairError):
    """A different decision was already recorded for this outcome."""


class PendingReviewError(TrajPairError):
    """The operation requires every match to be resolved first."""

    def __init__(self, pending_ids):
        self.pending_ids = list(pending_ids)
        super().__init__(f"{len(self.pending_ids)} match(es) still pending review")


class StateVersionError(TrajPairError):
    """Persisted state has an unsupported schema version."""


class ParseError(TrajPairError):
    """A data file could not be parsed."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason
