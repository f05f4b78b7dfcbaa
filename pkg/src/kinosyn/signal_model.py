"""Numeric containers shared by every stage of the pipeline.

The containers are frozen dataclasses over read-only float64 arrays, so
they can be passed between threads without copying. Constructors only check
structure (dimensions, label counts); value-level rules such as
non-negativity are reported by :func:`validate`, because raw signed EMG is a
legitimate ``EmgMatrix`` before rectification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
import numpy as np

from .errors import StructuralError


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if ndim == 1 and arr.ndim == 2 and arr.shape[0] == 1:
        arr = arr[0]
    if arr.ndim != ndim:
        raise StructuralError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


class Condition(str, enum.Enum):
    WEAK = "weak"
    STRONG = "strong"
    UNLABELED = "unlabeled"


class Segment(str, enum.Enum):
    UPPER_ARM = "upper_arm"
    FOREARM = "forearm"


class Group(str, enum.Enum):
    BICEP_AREA = "bicep_area"
    TRICEP_AREA = "tricep_area"
    RADIUS_SIDE = "radius_side"
    ULNA_SIDE = "ulna_side"
    BOUNDARY = "boundary"


_GROUPS = {
    Segment.UPPER_ARM: (Group.BICEP_AREA, Group.TRICEP_AREA),
    Segment.FOREARM: (Group.RADIUS_SIDE, Group.ULNA_SIDE),
}


@dataclass(frozen=True)
class ChannelLayout:
    """Placement of one armband electrode (8 per band, two bands)."""

    segment: Segment
    group: Group
    channel_index: int

    def __post_init__(self):
        if not 1 <= self.channel_index <= 8:
            raise StructuralError(f"channel_index {self.channel_index} not in [1, 8]")
        expected = ChannelLayout.group_for(self.segment, self.channel_index)
        if self.group is not expected:
            raise StructuralError(
                f"channel {self.channel_index} on {self.segment.value} belongs to "
                f"{expected.value}, not {self.group.value}"
            )

    @staticmethod
    def group_for(segment: Segment, channel_index: int) -> Group:
        first, second = _GROUPS[Segment(segment)]
        if channel_index in (1, 2, 3):
            return first
        if channel_index in (5, 6, 7):
            return second
        if channel_index in (4, 8):
            return Group.BOUNDARY
        raise StructuralError(f"channel_index {channel_index} not in [1, 8]")

    @classmethod
    def of(cls, segment: Segment, channel_index: int) -> "ChannelLayout":
        return cls(Segment(segment), cls.group_for(segment, channel_index), channel_index)

    @property
    def label(self) -> str:
        return f"{self.segment.value}:{self.channel_index}"


def two_armband_layout() -> list[ChannelLayout]:
    """Rows 1-8 on the upper arm, rows 9-16 on the forearm."""
    return [ChannelLayout.of(seg, i) for seg in Segment for i in range(1, 9)]


def default_channel_labels(d: int) -> list[str]:
    return [f"ch{i}" for i in range(1, d + 1)]


@dataclass(frozen=True)
class EmgMatrix:
    data: np.ndarray
    channel_labels: tuple[str, ...] = ()
    sample_rate_hz: float = 1.0

    def __post_init__(self):
        data = _frozen(self.data, 2, "EMG data")
        labels = tuple(self.channel_labels) or tuple(default_channel_labels(data.shape[0]))
        if len(labels) != data.shape[0]:
            raise StructuralError(
                f"{len(labels)} channel labels for {data.shape[0]} channels"
            )
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "channel_labels", labels)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    @property
    def d(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]

    def replace(self, data) -> "EmgMatrix":
        return EmgMatrix(data, self.channel_labels, self.sample_rate_hz)


@dataclass(frozen=True)
class ForceTrace:
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values, 1, "force values"))

    def __len__(self):
        return self.values.shape[0]


@dataclass(frozen=True)
class PositionTrace:
    """Planar trajectory, shape ``(2, k)``, metres."""

    points: np.ndarray

    def __post_init__(self):
        pts = _frozen(self.points, 2, "position points")
        if pts.shape[0] != 2:
            raise StructuralError(f"position points must be 2 x k, got {pts.shape}")
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class PressureFrameSequence:
    frames: np.ndarray  # (k, rows, cols)

    def __post_init__(self):
        object.__setattr__(self, "frames", _frozen(self.frames, 3, "pressure frames"))

    def __len__(self):
        return self.frames.shape[0]


@dataclass(frozen=True)
class Trial:
    emg: EmgMatrix
    force: ForceTrace
    position: PositionTrace
    condition: Condition = Condition.UNLABELED


@dataclass(frozen=True)
class TrialSet:
    trials: tuple[Trial, ...]

    def __post_init__(self):
        trials = tuple(self.trials)
        if trials:
            first = trials[0].emg
            for i, tr in enumerate(trials[1:], start=2):
                if tr.emg.d != first.d or tr.emg.channel_labels != first.channel_labels:
                    raise StructuralError(
                        f"trial {i} has channels {tr.emg.channel_labels}, "
                        f"expected {first.channel_labels}"
                    )
        object.__setattr__(self, "trials", trials)

    @property
    def condition_labels(self) -> list[Condition]:
        return [t.condition for t in self.trials]

    def __len__(self):
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Issue:
    kind: str  # "negative", "non_finite", "shape", "labels", "sample_rate"
    index: tuple[int, ...] | None
    message: str


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __len__(self):
        return len(self.issues)

    def __iter__(self):
        return iter(self.issues)

    def kinds(self) -> set[str]:
        return {i.kind for i in self.issues}


def _value_issues(arr: np.ndarray, what: str, allow_negative=False) -> list[Issue]:
    issues = []
    bad = ~np.isfinite(arr)
    for idx in zip(*np.nonzero(bad)):
        idx = tuple(int(i) for i in idx)
        issues.append(Issue("non_finite", idx, f"{what} entry {idx} is {arr[idx]}"))
    if not allow_negative:
        with np.errstate(invalid="ignore"):
            neg = np.isfinite(arr) & (arr < 0)
        for idx in zip(*np.nonzero(neg)):
            idx = tuple(int(i) for i in idx)
            issues.append(Issue("negative", idx, f"{what} entry {idx} = {arr[idx]!r} < 0"))
    return issues


def validate(obj) -> ValidationReport:
    """Check every value-level invariant of a container.

    Accepts an :class:`EmgMatrix`, :class:`ForceTrace`, :class:`PositionTrace`
    or :class:`PressureFrameSequence`. Indices in the report are 0-based
    ``(channel, sample)`` for matrices.
    """
    report = ValidationReport()
    if isinstance(obj, EmgMatrix):
        if obj.d < 1 or obj.k < 1:
            report.issues.append(Issue("shape", None, f"empty EMG matrix {obj.data.shape}"))
        if not (np.isfinite(obj.sample_rate_hz) and obj.sample_rate_hz > 0):
            report.issues.append(
                Issue("sample_rate", None, f"sample_rate_hz {obj.sample_rate_hz} must be > 0")
            )
        report.issues.extend(_value_issues(obj.data, "EMG"))
    elif isinstance(obj, ForceTrace):
        report.issues.extend(_value_issues(obj.values, "force"))
    elif isinstance(obj, PositionTrace):
        report.issues.extend(_value_issues(obj.points, "position", allow_negative=True))
    elif isinstance(obj, PressureFrameSequence):
        if len(obj) == 0:
            report.issues.append(Issue("shape", None, "no pressure frames"))
        report.issues.extend(_value_issues(obj.frames, "pressure"))
    else:
        raise TypeError(f"cannot validate {type(obj).__name__}")
    return report


def trial_lengths(total: int, trials: int) -> list[int]:
    """Split ``total`` samples over ``trials`` as evenly as possible.

    The first ``total % trials`` trials get one extra sample, so 939 over 10
    trials gives nine trials of 94 and one of 93.
    """
    if trials < 1 or total < trials:
        raise StructuralError(f"cannot split {total} samples over {trials} trials")
    base, extra = divmod(total, trials)
    return [base + 1 if i < extra else base for i in range(trials)]


__all__ = [
    "ChannelLayout",
    "Condition",
    "EmgMatrix",
    "ForceTrace",
    "Group",
    "Issue",
    "PositionTrace",
    "PressureFrameSequence",
    "Segment",
    "Trial",
    "TrialSet",
    "ValidationReport",
    "default_channel_labels",
    "trial_lengths",
    "two_armband_layout",
    "validate",
]

