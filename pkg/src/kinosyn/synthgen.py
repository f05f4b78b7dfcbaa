"""Seeded synthetic sessions with known synergies, activations and force.

Each true synergy owns a disjoint group of dominant channels, and the
activation of synergy ``i`` peaks in the ``i``-th time slot of every trial,
so the factorisation is identifiable up to permutation and scale. The
first half of the trials is generated at the weak amplitude and the second
half at the strong amplitude.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, StructuralError
from .signal_model import (
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
    default_channel_labels,
)


@dataclass(frozen=True)
class SynthSpec:
    d: int = 16
    n: int = 3
    trials: int = 10
    trial_len: int = 150
    noise_snr_db: float = 20.0
    seed: int = 0
    force_synergy_index: int = 1
    weak_strong_scale: tuple[float, float] = (0.1, 1.0)
    sample_rate_hz: float = 200.0
    force_scale: float = 50.0
    force_noise: float = 0.01
    line_length: float = 0.3
    position_jitter: float = 0.002
    pressure_grid: tuple[int, int] = (16, 10)

    def __post_init__(self):
        if not 1 <= self.n <= self.d:
            raise ParameterError(f"need 1 <= n <= d, got n={self.n}, d={self.d}")
        if self.trials < 1:
            raise ParameterError(f"trials must be >= 1, got {self.trials}")
        if self.trial_len < 2:
            raise ParameterError(f"trial_len must be >= 2, got {self.trial_len}")
        if not 1 <= self.force_synergy_index <= self.n:
            raise ParameterError(
                f"force_synergy_index must be in [1, {self.n}], got {self.force_synergy_index}"
            )
        weak, strong = self.weak_strong_scale
        if not (weak > 0 and strong > 0):
            raise ParameterError("weak_strong_scale entries must be > 0")
        if self.force_scale <= 0 or self.force_noise < 0 or self.position_jitter < 0:
            raise ParameterError("force_scale must be > 0; noise levels must be >= 0")
        if min(self.pressure_grid) < 1:
            raise ParameterError(f"bad pressure grid {self.pressure_grid}")

    @property
    def conditions(self) -> list[Condition]:
        half = self.trials // 2
        return [Condition.WEAK] * half + [Condition.STRONG] * (self.trials - half)


@dataclass(frozen=True)
class SynthDataset:
    spec: SynthSpec
    trial_set: TrialSet
    pressure: tuple[PressureFrameSequence, ...]
    W_true: np.ndarray
    C_true: np.ndarray
    F_h_true: ForceTrace
    selection_true: int
    positions_true: np.ndarray = field(repr=False, default=None)

    @property
    def conditions(self) -> list[Condition]:
        return self.trial_set.condition_labels


def _synergies(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    W = rng.uniform(0.0, 0.08, size=(spec.d, spec.n))
    groups = np.array_split(np.arange(spec.d), spec.n)
    for i, rows in enumerate(groups):
        W[rows, i] = rng.uniform(0.6, 1.0, size=len(rows))
    return W


def _activations(spec: SynthSpec, amp: float, rng: np.random.Generator) -> np.ndarray:
    L, n = spec.trial_len, spec.n
    t = np.arange(L, dtype=float)
    width = 0.35 * L / n
    C = np.empty((n, L))
    for i in range(n):
        centre = L * (i + 0.5) / n + rng.normal(0.0, 0.02 * L)
        C[i] = np.exp(-0.5 * ((t - centre) / width) ** 2) + 0.02
    return amp * C


def _pressure_frames(force: np.ndarray, x_frac: np.ndarray, grid) -> np.ndarray:
    rows, cols = grid
    r = np.arange(rows)[:, None]
    c = np.arange(cols)[None, :]
    frames = np.empty((force.shape[0], rows, cols))
    for j, (f, xf) in enumerate(zip(force, x_frac)):
        cr = (rows - 1) * min(max(xf, 0.0), 1.0)
        blob = np.exp(-0.5 * (((r - cr) / 1.5) ** 2 + ((c - (cols - 1) / 2) / 1.5) ** 2))
        frames[j] = f * (blob / blob.sum())
    return frames


def generate(spec: SynthSpec | None = None) -> SynthDataset:
    spec = spec or SynthSpec()
    rng = np.random.default_rng(spec.seed)
    W = _synergies(spec, rng)
    labels = tuple(default_channel_labels(spec.d))
    weak, strong = spec.weak_strong_scale
    f_row = spec.force_synergy_index - 1
    line = np.linspace(0.0, spec.line_length, spec.trial_len)

    trials, frames, C_parts, F_parts, P_parts = [], [], [], [], []
    for cond in spec.conditions:
        amp = weak if cond is Condition.WEAK else strong
        C = _activations(spec, amp, rng)
        clean = W @ C
        if math.isinf(spec.noise_snr_db) and spec.noise_snr_db > 0:
            emg = clean
        else:
            # noise level is set per trial so weak trials keep the same SNR
            sigma = np.sqrt(np.mean(clean ** 2) / 10 ** (spec.noise_snr_db / 10))
            emg = np.maximum(clean + rng.normal(0.0, sigma, clean.shape), 0.0)

        force = spec.force_scale * C[f_row]
        force = force + rng.normal(0.0, spec.force_noise * spec.force_scale, force.shape)
        force = np.maximum(force, 0.0)

        true_path = np.vstack([line, np.zeros_like(line)])
        raw_path = true_path + rng.normal(0.0, spec.position_jitter, true_path.shape)

        pf = _pressure_frames(force, line / spec.line_length if spec.line_length else line,
                              spec.pressure_grid)
        frames.append(PressureFrameSequence(pf))
        trials.append(Trial(
            EmgMatrix(emg, labels, spec.sample_rate_hz),
            ForceTrace(force, "F_h"),
            PositionTrace(raw_path),
            cond,
        ))
        C_parts.append(C)
        F_parts.append(force)
        P_parts.append(true_path)

    return SynthDataset(
        spec=spec,
        trial_set=TrialSet(tuple(trials)),
        pressure=tuple(frames),
        W_true=W,
        C_true=np.concatenate(C_parts, axis=1),
        F_h_true=ForceTrace(np.concatenate(F_parts), "F_h"),
        selection_true=spec.force_synergy_index,
        positions_true=np.concatenate(P_parts, axis=1),
    )


def _cosine_matrix(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    na = np.linalg.norm(A, axis=0)
    nb = np.linalg.norm(B, axis=0)
    den = np.outer(na, nb)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, (A.T @ B) / np.where(den > 0, den, 1.0), 0.0)


def match_synergies(W_true, W_est, max_n: int = 8):
    """Best one-to-one pairing of estimated to true synergies by cosine.

    Searches all column permutations. Returns ``(perm, cosines)`` where
    column ``perm[i]`` of ``W_est`` is paired with column ``i`` of
    ``W_true`` and ``cosines[i]`` is their cosine similarity.
    """
    W_true = np.asarray(W_true, dtype=float)
    W_est = np.asarray(W_est, dtype=float)
    if W_true.shape != W_est.shape or W_true.ndim != 2:
        raise StructuralError(f"shape mismatch: {W_true.shape} vs {W_est.shape}")
    n = W_true.shape[1]
    if n > max_n:
        raise ParameterError(f"brute-force matching limited to {max_n} columns, got {n}")
    cos = _cosine_matrix(W_true, W_est)
    rows = np.arange(n)
    best_perm, best_total = None, -np.inf
    for perm in itertools.permutations(range(n)):
        total = cos[rows, perm].sum()
        if total > best_total:
            best_perm, best_total = perm, total
    perm = tuple(int(p) for p in best_perm)
    return perm, cos[rows, list(perm)]
