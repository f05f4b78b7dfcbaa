"""Force-synergy selection and kinodynamic command synthesis."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ParameterError, StructuralError
from .nmf import SynergySet
from .signal_model import Condition, ForceTrace, PositionTrace

DEFAULT_ALPHA = 20.0


def normalize_interchannel(s: SynergySet) -> SynergySet:
    """Scale every synergy to a peak channel weight of 1.

    The matching activation row absorbs the factor, so ``W @ C`` is
    unchanged. All-zero synergies are left alone and listed in
    ``zero_synergies``.
    """
    peaks = s.W.max(axis=0)
    zero = tuple(int(i) for i in np.flatnonzero(peaks <= 0))
    factors = np.where(peaks > 0, peaks, 1.0)
    W = s.W / factors
    C = s.C * factors[:, None]
    return replace(s, W=W, C=C, zero_synergies=zero)


@dataclass(frozen=True)
class ForceSynergySelection:
    index: int  # 1-based
    score: float
    all_scores: tuple[float, ...]

    @property
    def row(self) -> int:
        return self.index - 1


def _scores(f: np.ndarray, C: np.ndarray, method: str) -> np.ndarray:
    if method == "projection":
        return C @ f
    if method == "correlation":
        fc = f - f.mean()
        Cc = C - C.mean(axis=1, keepdims=True)
        den = np.linalg.norm(Cc, axis=1) * np.linalg.norm(fc)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(den > 0, (Cc @ fc) / np.where(den > 0, den, 1.0), 0.0)
    raise ParameterError(f"unknown scoring method {method!r}")


def select_force_synergy(F_h: ForceTrace, s: SynergySet,
                         method: str = "projection") -> ForceSynergySelection:
    """Pick the activation curve most aligned with the measured force.

    ``method="projection"`` scores each row by the raw inner product
    ``F_h . c_i``; ``"correlation"`` uses the Pearson coefficient instead.
    Exact ties go to the lowest index.
    """
    f = F_h.values if isinstance(F_h, ForceTrace) else np.asarray(F_h, dtype=float)
    if f.shape[0] != s.k:
        raise StructuralError(f"force has {f.shape[0]} samples, activations have {s.k}")
    if s.n < 1:
        raise StructuralError("synergy set is empty")
    scores = _scores(f, s.C, method)
    best = int(np.argmax(scores))  # first maximum
    return ForceSynergySelection(best + 1, float(scores[best]), tuple(float(v) for v in scores))


def force_command(selection: ForceSynergySelection, s: SynergySet,
                  alpha: float = DEFAULT_ALPHA, label: str = "F_hat") -> ForceTrace:
    if not alpha > 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    if not 1 <= selection.index <= s.n:
        raise StructuralError(f"selection index {selection.index} outside 1..{s.n}")
    return ForceTrace(alpha * s.C[selection.row], label)


def position_command(p: PositionTrace) -> PositionTrace:
    """The smoothed hand path is sent to the robot unchanged."""
    return p


@dataclass(frozen=True)
class CommandStream:
    force: ForceTrace
    position: PositionTrace
    alpha: float
    condition: Condition = Condition.UNLABELED

    def __post_init__(self):
        if len(self.force) != len(self.position):
            raise StructuralError(
                f"force has {len(self.force)} samples, position has {len(self.position)}"
            )

    def __len__(self):
        return len(self.force)


def build_command_stream(F_hat: ForceTrace, p: PositionTrace, alpha: float,
                         condition=Condition.UNLABELED) -> CommandStream:
    if not alpha > 0:
        raise ParameterError(f"alpha must be > 0, got {alpha}")
    return CommandStream(F_hat, p, float(alpha), Condition(condition))


def split_by_condition(stream: CommandStream, lengths, conditions) -> dict:
    """Slice a concatenated stream into one stream per condition label.

    Trials are taken in order; all trials sharing a label are joined.
    Returns ``{Condition: (CommandStream, [per-trial lengths])}``.
    """
    lengths = [int(n) for n in lengths]
    conditions = [Condition(c) for c in conditions]
    if len(lengths) != len(conditions):
        raise StructuralError(f"{len(lengths)} trial lengths but {len(conditions)} labels")
    if sum(lengths) != len(stream):
        raise StructuralError(f"trial lengths sum to {sum(lengths)}, stream has {len(stream)}")
    bounds = np.cumsum([0] + lengths)
    out = {}
    for cond in dict.fromkeys(conditions):
        idx = [i for i, c in enumerate(conditions) if c is cond]
        sel = np.concatenate([np.arange(bounds[i], bounds[i + 1]) for i in idx])
        sub = CommandStream(
            ForceTrace(stream.force.values[sel], f"{stream.force.label}_{cond.value}"),
            PositionTrace(stream.position.points[:, sel]),
            stream.alpha,
            cond,
        )
        out[cond] = (sub, [lengths[i] for i in idx])
    return out
