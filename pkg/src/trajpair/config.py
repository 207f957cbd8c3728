"""Run configuration shared by the pipeline, the review service and splits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .coverage import LateralThresholds
from .errors import InvalidInputError, ParseError


@dataclass(frozen=True)
class RunConfig:
    thetas: tuple[float, ...] = (2.0, 4.0, 8.0)
    delta_d: float = 1.0
    base_rate_hz: float = 10.0
    min_frames: int = 100
    max_frames: int = 150
    intervals: tuple[int, ...] = (1, 2, 3, 4, 5)
    label_stride: int = 10
    speed_threshold: float = 0.2
    validation_sequences: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "intervals", tuple(int(k) for k in self.intervals))
        object.__setattr__(
            self, "validation_sequences", tuple(str(s) for s in self.validation_sequences)
        )
        LateralThresholds(self.thetas)  # validates ascending, positive, non-empty
        if self.delta_d <= 0:
            raise InvalidInputError(f"delta_d must be positive, got {self.delta_d}")
        if self.base_rate_hz <= 0:
            raise InvalidInputError(f"base_rate_hz must be positive, got {self.base_rate_hz}")
        if not 1 <= self.min_frames <= self.max_frames:
            raise InvalidInputError(
                f"need 1 <= min_frames <= max_frames, got {self.min_frames}, {self.max_frames}"
            )
        if not self.intervals or min(self.intervals) < 1:
            raise InvalidInputError(f"intervals must be >= 1: {self.intervals}")
        if self.label_stride < 1:
            raise InvalidInputError(f"label_stride must be >= 1, got {self.label_stride}")
        if self.speed_threshold < 0:
            raise InvalidInputError(
                f"speed_threshold must be >= 0, got {self.speed_threshold}"
            )

    def thresholds(self) -> LateralThresholds:
        return LateralThresholds(self.thetas)

    def to_jsonable(self) -> dict:
        return {
            "thetas": list(self.thetas),
            "delta_d": self.delta_d,
            "base_rate_hz": self.base_rate_hz,
            "min_frames": self.min_frames,
            "max_frames": self.max_frames,
            "intervals": list(self.intervals),
            "label_stride": self.label_stride,
            "speed_threshold": self.speed_threshold,
            "validation_sequences": list(self.validation_sequences),
        }

    @classmethod
    def from_jsonable(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("thetas", "intervals", "validation_sequences"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def load_config(path) -> RunConfig:
    """Read a JSON config file; missing keys fall back to the defaults."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(path, 0, f"cannot read config: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(path, 0, "config must be a JSON object")
    return RunConfig.from_jsonable(data)
