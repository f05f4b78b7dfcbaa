"""Turn raw per-trial sensor streams into the aligned matrices used for
factorisation: rectify and smooth EMG, sum pressure cells into a force,
Kalman-filter the fingertip path, resample to a common length and concatenate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NonFiniteError, ParameterError, StructuralError
from .signal_model import (
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
    trial_lengths,
)

PAPER_TOTAL_LEN = 939


@dataclass(frozen=True)
class PreprocessConfig:
    ma_window: int = 10
    kalman_q: float = 1e-3
    kalman_r: float = 1e-2
    target_len: int = math.ceil(PAPER_TOTAL_LEN / 10)
    # when set, overrides target_len: trials share this many samples in total
    total_len: int | None = None
    rectify: bool = True

    def __post_init__(self):
        if int(self.ma_window) < 1:
            raise ParameterError(f"ma_window must be >= 1, got {self.ma_window}")
        if int(self.target_len) < 2:
            raise ParameterError(f"target_len must be >= 2, got {self.target_len}")
        if not (self.kalman_q > 0 and self.kalman_r > 0):
            raise ParameterError("kalman_q and kalman_r must be > 0")
        if self.total_len is not None and int(self.total_len) < 2:
            raise ParameterError(f"total_len must be >= 2, got {self.total_len}")

    def lengths_for(self, trials: int) -> list[int]:
        if self.total_len is None:
            return [int(self.target_len)] * trials
        lengths = trial_lengths(int(self.total_len), trials)
        if min(lengths) < 2:
            raise ParameterError(f"total_len {self.total_len} too short for {trials} trials")
        return lengths


def _require_finite(arr: np.ndarray, what: str):
    bad = np.argwhere(~np.isfinite(arr))
    if bad.size:
        idx = tuple(int(i) for i in bad[0])
        raise NonFiniteError(f"{what} has non-finite value at index {idx}", index=idx)


def rectify(signal: EmgMatrix) -> EmgMatrix:
    _require_finite(signal.data, "EMG")
    return signal.replace(np.abs(signal.data))


def moving_average(signal: EmgMatrix, window: int) -> EmgMatrix:
    """Causal per-channel moving average.

    Sample ``j`` is the mean of samples ``max(0, j - window + 1) .. j``; the
    first ``window - 1`` outputs average over the samples that exist.
    """
    window = int(window)
    if window < 1 or window > signal.k:
        raise ParameterError(f"window must be in [1, {signal.k}], got {window}")
    if window == 1:
        return signal
    out = _kernels.moving_average(np.ascontiguousarray(signal.data), window)
    return signal.replace(out)


def sum_pressure(frames: PressureFrameSequence, label: str = "F_h") -> ForceTrace:
    if len(frames) == 0:
        raise ParameterError("empty pressure frame sequence")
    _require_finite(frames.frames, "pressure frames")
    return ForceTrace(frames.frames.sum(axis=(1, 2)), label)


def kalman_smooth(raw: PositionTrace, q: float = 1e-3, r: float = 1e-2) -> PositionTrace:
    """Filter each axis with a constant-velocity Kalman model (unit time step).

    State is ``[position, velocity]``, started at the first measurement with
    zero velocity and identity covariance; ``q`` scales the white-noise
    acceleration covariance and ``r`` is the measurement variance. Returns
    the filtered (not smoothed-backward) positions.
    """
    if not (q > 0 and r > 0):
        raise ParameterError(f"q and r must be > 0, got q={q}, r={r}")
    _require_finite(raw.points, "position")
    if len(raw) == 0:
        return raw
    out = np.vstack([
        _kernels.kalman_cv(np.ascontiguousarray(raw.points[axis]), float(q), float(r))
        for axis in range(2)
    ])
    return PositionTrace(out)


def resample_array(x: np.ndarray, target_len: int) -> np.ndarray:
    """Linear interpolation of the last axis onto ``target_len`` points
    spanning the same normalised time interval."""
    x = np.asarray(x, dtype=float)
    k = x.shape[-1]
    if k < 2:
        raise ParameterError(f"need at least 2 samples to resample, got {k}")
    if target_len < 2:
        raise ParameterError(f"target_len must be >= 2, got {target_len}")
    if target_len == k:
        return x.copy()
    src = np.linspace(0.0, 1.0, k)
    dst = np.linspace(0.0, 1.0, target_len)
    flat = x.reshape(-1, k)
    out = np.vstack([np.interp(dst, src, row) for row in flat])
    return out.reshape(x.shape[:-1] + (target_len,))


def resample(signal, target_len: int):
    """Resample an EMG matrix, force trace, position trace or bare array."""
    if isinstance(signal, EmgMatrix):
        rate = signal.sample_rate_hz * (target_len - 1) / max(signal.k - 1, 1)
        return EmgMatrix(resample_array(signal.data, target_len), signal.channel_labels, rate)
    if isinstance(signal, ForceTrace):
        return ForceTrace(resample_array(signal.values, target_len), signal.label)
    if isinstance(signal, PositionTrace):
        return PositionTrace(resample_array(signal.points, target_len))
    return resample_array(signal, target_len)


def concatenate_trials(trials: TrialSet) -> tuple[EmgMatrix, ForceTrace, PositionTrace]:
    if len(trials) == 0:
        raise StructuralError("no trials to concatenate")
    first = trials.trials[0].emg
    for i, tr in enumerate(trials, start=1):
        if tr.emg.d != first.d or tr.emg.channel_labels != first.channel_labels:
            raise StructuralError(f"trial {i} channel layout differs from trial 1")
        if not (tr.emg.k == len(tr.force) == len(tr.position)):
            raise StructuralError(
                f"trial {i} lengths differ: emg {tr.emg.k}, force {len(tr.force)}, "
                f"position {len(tr.position)}"
            )
    emg = EmgMatrix(
        np.concatenate([t.emg.data for t in trials], axis=1),
        first.channel_labels,
        first.sample_rate_hz,
    )
    force = ForceTrace(
        np.concatenate([t.force.values for t in trials]), trials.trials[0].force.label
    )
    pos = PositionTrace(np.concatenate([t.position.points for t in trials], axis=1))
    return emg, force, pos


def split_trials(emg: EmgMatrix, force: ForceTrace, position: PositionTrace,
                 lengths, conditions=None) -> TrialSet:
    """Inverse of :func:`concatenate_trials` for known per-trial lengths."""
    lengths = [int(n) for n in lengths]
    if sum(lengths) != emg.k or len(force) != emg.k or len(position) != emg.k:
        raise StructuralError(
            f"lengths sum to {sum(lengths)} but data has {emg.k}/{len(force)}/{len(position)}"
        )
    if conditions is None:
        conditions = [Condition.UNLABELED] * len(lengths)
    bounds = np.cumsum([0] + lengths)
    out = []
    for (a, b), cond in zip(zip(bounds[:-1], bounds[1:]), conditions):
        out.append(Trial(
            emg.replace(emg.data[:, a:b]),
            ForceTrace(force.values[a:b], force.label),
            PositionTrace(position.points[:, a:b]),
            Condition(cond),
        ))
    return TrialSet(tuple(out))


@dataclass(frozen=True)
class RawTrial:
    """One trial as it comes off the sensors, before any processing."""

    emg: EmgMatrix
    force: ForceTrace | PressureFrameSequence
    position: PositionTrace
    condition: Condition = Condition.UNLABELED


@dataclass(frozen=True)
class Preprocessed:
    emg: EmgMatrix
    force: ForceTrace
    position: PositionTrace
    trials: TrialSet
    lengths: tuple[int, ...]

    @property
    def conditions(self) -> list[Condition]:
        return self.trials.condition_labels


def preprocess_trial(raw: RawTrial, target_len: int, config: PreprocessConfig) -> Trial:
    emg = rectify(raw.emg) if config.rectify else raw.emg
    emg = moving_average(emg, min(config.ma_window, emg.k))
    force = raw.force
    if isinstance(force, PressureFrameSequence):
        force = sum_pressure(force)
    position = kalman_smooth(raw.position, config.kalman_q, config.kalman_r)
    return Trial(
        resample(emg, target_len),
        resample(force, target_len),
        resample(position, target_len),
        raw.condition,
    )


def preprocess_trials(raw_trials, config: PreprocessConfig | None = None) -> Preprocessed:
    """Run the full chain over a list of :class:`RawTrial` and concatenate."""
    config = config or PreprocessConfig()
    raw_trials = list(raw_trials)
    if not raw_trials:
        raise StructuralError("no trials to preprocess")
    lengths = config.lengths_for(len(raw_trials))
    trials = TrialSet(tuple(
        preprocess_trial(raw, n, config) for raw, n in zip(raw_trials, lengths)
    ))
    emg, force, pos = concatenate_trials(trials)
    return Preprocessed(emg, force, pos, trials, tuple(lengths))
