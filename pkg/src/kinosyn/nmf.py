"""Synergy extraction by non-negative matrix factorisation.

``M ~= W @ C`` with ``W`` (channels x synergies) and ``C`` (synergies x
time) fit by Lee-Seung multiplicative updates on the squared Frobenius loss.
Several seeded restarts are run and the lowest final objective wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DegenerateInputError, ParameterError, StructuralError
from .signal_model import EmgMatrix, validate


@dataclass(frozen=True)
class NmfOptions:
    max_iters: int = 2000
    tol: float = 1e-6
    restarts: int = 10
    seed: int = 0
    epsilon: float = 1e-12

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ParameterError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be > 0, got {self.tol}")
        if int(self.restarts) < 1:
            raise ParameterError(f"restarts must be >= 1, got {self.restarts}")
        if not self.epsilon > 0:
            raise ParameterError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class SynergySet:
    W: np.ndarray
    C: np.ndarray
    vaf: float
    seed: int = 0
    iterations_run: int = 0
    final_objective: float = 0.0
    restart: int = 0
    # objective after every iteration, one array per restart
    histories: tuple = field(default=(), repr=False, compare=False)
    zero_synergies: tuple[int, ...] = ()

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        C = np.array(self.C, dtype=float)
        if W.ndim != 2 or C.ndim != 2 or W.shape[1] != C.shape[0]:
            raise StructuralError(f"W {W.shape} and C {C.shape} do not conform")
        W.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "C", C)

    @property
    def n(self) -> int:
        return self.W.shape[1]

    @property
    def d(self) -> int:
        return self.W.shape[0]

    @property
    def k(self) -> int:
        return self.C.shape[1]

    def reconstruct(self) -> np.ndarray:
        return self.W @ self.C


def _matrix(M) -> np.ndarray:
    return M.data if isinstance(M, EmgMatrix) else np.asarray(M, dtype=float)


def vaf(M, W, C) -> float:
    """Variance accounted for: ``1 - ||M - WC||^2 / ||M||^2`` (uncentred)."""
    M = _matrix(M)
    W = np.asarray(W, dtype=float)
    C = np.asarray(C, dtype=float)
    if W.shape[0] != M.shape[0] or C.shape[1] != M.shape[1] or W.shape[1] != C.shape[0]:
        raise StructuralError(f"W {W.shape} @ C {C.shape} does not match M {M.shape}")
    total = float(np.sum(M * M))
    if total == 0.0:
        raise DegenerateInputError("VAF undefined for an all-zero matrix")
    R = M - W @ C
    return 1.0 - float(np.sum(R * R)) / total


def _check_input(M: EmgMatrix | np.ndarray, n: int) -> np.ndarray:
    if not isinstance(M, EmgMatrix):
        M = EmgMatrix(M)
    report = validate(M)
    if not report.ok:
        raise StructuralError(f"invalid EMG matrix: {report.issues[0].message}")
    data = np.ascontiguousarray(M.data, dtype=np.float64)
    if not np.any(data > 0):
        raise DegenerateInputError("cannot factorise an all-zero matrix")
    if not 1 <= n <= M.d:
        raise ParameterError(f"number of synergies must be in [1, {M.d}], got {n}")
    return data


def initial_factors(M: np.ndarray, n: int, rng: np.random.Generator):
    """Uniform (0, 1] entries scaled by sqrt(mean(M) / n)."""
    d, k = M.shape
    scale = np.sqrt(M.mean() / n)
    W = (1.0 - rng.random((d, n))) * scale
    C = (1.0 - rng.random((n, k))) * scale
    return W, C


def restart_rng(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(restart)])


def factorize(M, n: int, opts: NmfOptions | None = None) -> SynergySet:
    """Fit ``n`` synergies to ``M``; best of ``opts.restarts`` seeded runs.

    Ties in the final objective go to the lowest restart index, so the result
    does not depend on the order in which restarts finish.
    """
    opts = opts or NmfOptions()
    data = _check_input(M, n)
    best = None
    histories = []
    for r in range(opts.restarts):
        W0, C0 = initial_factors(data, n, restart_rng(opts.seed, r))
        W, C, hist, iters = _kernels.mu_fit(
            data, W0, C0, int(opts.max_iters), float(opts.tol), float(opts.epsilon)
        )
        histories.append(np.asarray(hist).copy())
        obj = float(hist[-1])
        if best is None or obj < best[0]:
            best = (obj, r, W, C, iters)
    obj, r, W, C, iters = best
    return SynergySet(
        W=W,
        C=C,
        vaf=vaf(data, W, C),
        seed=opts.seed,
        iterations_run=int(iters),
        final_objective=obj,
        restart=r,
        histories=tuple(histories),
    )


@dataclass(frozen=True)
class OrderSelection:
    n: int
    synergies: SynergySet
    vaf_by_order: dict
    reached: bool  # False when no order up to d met the threshold

    def __iter__(self):
        # allows ``n, fit = select_order(...)``
        return iter((self.n, self.synergies))


def select_order(M, threshold: float = 0.9, opts: NmfOptions | None = None,
                 max_order: int | None = None) -> OrderSelection:
    """Smallest synergy count whose fit reaches ``threshold`` VAF."""
    if not 0 < threshold < 1:
        raise ParameterError(f"threshold must be in (0, 1), got {threshold}")
    opts = opts or NmfOptions()
    data = _check_input(M, 1)
    d = data.shape[0]
    top = d if max_order is None else min(int(max_order), d)
    vafs = {}
    fit = None
    for n in range(1, top + 1):
        fit = factorize(data, n, opts)
        vafs[n] = fit.vaf
        if fit.vaf >= threshold:
            return OrderSelection(n, fit, vafs, True)
    return OrderSelection(top, fit, vafs, False)
