"""Planar end-effector stand-in that executes a command stream.

Force follows a first-order lag toward ``gain * F_hat`` (forward Euler,
floored at zero, optional seeded Gaussian noise); position moves toward the
commanded point by at most ``position_max_step`` per tick.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ParameterError, StructuralError
from .signal_model import ForceTrace, PositionTrace
from .synergy import CommandStream


@dataclass(frozen=True)
class ActuatorModel:
    force_time_constant: float = 0.1
    force_gain: float = 1.0
    position_max_step: float = 0.01
    noise_sigma: float = 0.0
    dt: float = 0.02

    def __post_init__(self):
        for name in ("force_time_constant", "force_gain", "position_max_step", "dt"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.noise_sigma >= 0:
            raise ParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        # a larger Euler step overshoots and breaks the ordering guarantees
        if self.dt > self.force_time_constant:
            raise ParameterError(
                f"dt ({self.dt}) must not exceed force_time_constant "
                f"({self.force_time_constant})"
            )

    @property
    def blend(self) -> float:
        return self.dt / self.force_time_constant


@dataclass(frozen=True)
class SimState:
    force: float = 0.0
    position: tuple[float, float] = (0.0, 0.0)


def step(state: SimState, command_sample, model: ActuatorModel,
         rng: np.random.Generator | None = None) -> SimState:
    """Advance one tick. ``command_sample`` is ``(force, (x, y))``."""
    f_cmd, (x_cmd, y_cmd) = command_sample
    noise = 0.0
    if model.noise_sigma > 0:
        if rng is None:
            raise ParameterError("noise_sigma > 0 needs a random generator")
        noise = float(rng.normal(0.0, model.noise_sigma))
    f = state.force + model.blend * (model.force_gain * f_cmd - state.force) + noise
    f = max(f, 0.0)
    x, y = state.position
    dx, dy = x_cmd - x, y_cmd - y
    dist = float(np.hypot(dx, dy))
    if dist > model.position_max_step:
        s = model.position_max_step / dist
        pos = (x + dx * s, y + dy * s)
    else:
        pos = (float(x_cmd), float(y_cmd))
    return SimState(float(f), pos)


@dataclass(frozen=True)
class SimMetrics:
    force_rmse_vs_command: float
    gain_ratio: float | None
    path_deviation_max: float

    def as_dict(self) -> dict:
        return {
            "force_rmse_vs_command": self.force_rmse_vs_command,
            "gain_ratio": self.gain_ratio,
            "path_deviation_max": self.path_deviation_max,
        }


@dataclass(frozen=True)
class SimResult:
    F_r: ForceTrace
    executed: PositionTrace
    metrics: SimMetrics


def _metrics(f_cmd, f_r, p_cmd, p_exec) -> SimMetrics:
    rmse = float(np.sqrt(np.mean((f_r - f_cmd) ** 2)))
    active = f_cmd > 0
    gain = float(f_r[active].mean() / f_cmd[active].mean()) if active.any() else None
    dev = float(np.max(np.hypot(*(p_exec - p_cmd))))
    return SimMetrics(rmse, gain, dev)


def run(stream: CommandStream, model: ActuatorModel | None = None, seed: int = 0,
        segments=None) -> SimResult:
    """Execute ``stream`` from rest at its first commanded point.

    ``segments`` is an optional list of per-trial lengths; the actuator is
    reset (zero force, pen placed at the segment start) at each boundary.
    """
    model = model or ActuatorModel()
    k = len(stream)
    if k == 0:
        raise ParameterError("empty command stream")
    segments = [k] if segments is None else [int(n) for n in segments]
    if sum(segments) != k or min(segments) < 1:
        raise StructuralError(f"segment lengths {segments} do not cover {k} samples")

    f_cmd = np.ascontiguousarray(stream.force.values, dtype=float)
    p_cmd = np.ascontiguousarray(stream.position.points, dtype=float)
    if model.noise_sigma > 0:
        noise = np.random.default_rng(seed).normal(0.0, model.noise_sigma, k)
    else:
        noise = np.zeros(k)

    f_r = np.empty(k)
    p_exec = np.empty((2, k))
    start = 0
    for n in segments:
        sl = slice(start, start + n)
        f_seg, p_seg = _kernels.actuator(
            f_cmd[sl], np.ascontiguousarray(p_cmd[:, sl]), 0.0,
            p_cmd[:, start].copy(), model.blend, float(model.force_gain),
            float(model.position_max_step), noise[sl],
        )
        f_r[sl] = f_seg
        p_exec[:, sl] = p_seg
        start += n
    return SimResult(
        ForceTrace(f_r, "F_r"),
        PositionTrace(p_exec),
        _metrics(f_cmd, f_r, p_cmd, p_exec),
    )


def compare_traces(a: ForceTrace, b: ForceTrace) -> dict:
    """RMSE between two force traces plus ``b``'s mean and peak gain over ``a``.

    Ratios are ``None`` when ``a`` has zero mean (or zero peak).
    """
    av = a.values if isinstance(a, ForceTrace) else np.asarray(a, dtype=float)
    bv = b.values if isinstance(b, ForceTrace) else np.asarray(b, dtype=float)
    if av.shape != bv.shape:
        raise StructuralError(f"trace lengths differ: {av.shape[0]} vs {bv.shape[0]}")
    if av.size == 0:
        raise ParameterError("empty traces")
    ma, pa = av.mean(), av.max()
    return {
        "rmse": float(np.sqrt(np.mean((av - bv) ** 2))),
        "gain_ratio": float(bv.mean() / ma) if ma > 0 else None,
        "peak_ratio": float(bv.max() / pa) if pa > 0 else None,
    }
