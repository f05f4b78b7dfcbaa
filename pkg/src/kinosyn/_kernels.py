"""Inner loops of the pipeline.

Every kernel exists twice: a loop-level version compiled with numba and a
vectorised numpy version. Both take and return plain float64 arrays and must
agree to rounding error; ``tests/test_kernels.py`` holds them to that. The
public names at the bottom of the module point at whichever backend
``_accel.BACKEND`` selected.
"""

import numpy as np

from ._accel import BACKEND, njit


# -- multiplicative-update NMF ---------------------------------------------


@njit
def _mu_fit_numba(M, W, C, max_iters, tol, eps):
    d, k = M.shape
    n = W.shape[1]
    history = np.empty(max_iters + 1)
    WtM = np.empty((n, k))
    den = np.empty((n, k))
    WtW = np.empty((n, n))
    MCt = np.empty((d, n))
    CCt = np.empty((n, n))
    row = np.empty(n)
    resid = np.empty(k)

    history[0] = _objective_numba(M, W, C, resid)
    it = 0
    while it < max_iters:
        # C <- C * (W'M) / max(W'W C, eps); inner loops run along time
        for a in range(n):
            for b in range(n):
                acc = 0.0
                for i in range(d):
                    acc += W[i, a] * W[i, b]
                WtW[a, b] = acc
        WtM[:, :] = 0.0
        den[:, :] = 0.0
        for a in range(n):
            for i in range(d):
                w = W[i, a]
                for j in range(k):
                    WtM[a, j] += w * M[i, j]
            for b in range(n):
                g = WtW[a, b]
                for j in range(k):
                    den[a, j] += g * C[b, j]
        for a in range(n):
            for j in range(k):
                q = den[a, j]
                C[a, j] = C[a, j] * WtM[a, j] / (q if q > eps else eps)

        # W <- W * (M C') / max(W C C', eps)
        for a in range(n):
            for b in range(n):
                acc = 0.0
                for j in range(k):
                    acc += C[a, j] * C[b, j]
                CCt[a, b] = acc
        for i in range(d):
            for a in range(n):
                acc = 0.0
                for j in range(k):
                    acc += M[i, j] * C[a, j]
                MCt[i, a] = acc
        for i in range(d):
            for a in range(n):
                acc = 0.0
                for b in range(n):
                    acc += W[i, b] * CCt[b, a]
                row[a] = acc if acc > eps else eps
            for a in range(n):
                W[i, a] = W[i, a] * MCt[i, a] / row[a]

        it += 1
        cur = _objective_numba(M, W, C, resid)
        history[it] = cur
        prev = history[it - 1]
        if prev <= 0.0 or (prev - cur) / prev < tol:
            break
    return W, C, history[: it + 1], it


@njit
def _objective_numba(M, W, C, resid):
    d, k = M.shape
    n = W.shape[1]
    total = 0.0
    for i in range(d):
        for j in range(k):
            resid[j] = M[i, j]
        for a in range(n):
            w = W[i, a]
            for j in range(k):
                resid[j] -= w * C[a, j]
        for j in range(k):
            total += resid[j] * resid[j]
    return total


@njit
def _residual_numba(M, W, C):
    return _objective_numba(M, W, C, np.empty(M.shape[1]))


def _mu_fit_numpy(M, W, C, max_iters, tol, eps):
    history = [_objective_numpy(M, W, C)]
    it = 0
    while it < max_iters:
        C *= (W.T @ M) / np.maximum(W.T @ W @ C, eps)
        W *= (M @ C.T) / np.maximum(W @ (C @ C.T), eps)
        it += 1
        cur = _objective_numpy(M, W, C)
        history.append(cur)
        prev = history[-2]
        if prev <= 0.0 or (prev - cur) / prev < tol:
            break
    return W, C, np.asarray(history), it


def _objective_numpy(M, W, C):
    R = M - W @ C
    return float(np.sum(R * R))


# -- causal moving average --------------------------------------------------


@njit
def _moving_average_numba(X, window):
    d, k = X.shape
    out = np.empty((d, k))
    for i in range(d):
        for j in range(k):
            lo = j - window + 1
            if lo < 0:
                lo = 0
            s = 0.0
            for t in range(lo, j + 1):
                s += X[i, t]
            out[i, j] = s / (j + 1 - lo)
    return out


def _moving_average_numpy(X, window):
    d, k = X.shape
    # left-pad with NaN so the head windows can be averaged over what exists
    padded = np.concatenate([np.full((d, window - 1), np.nan), X], axis=1)
    win = np.lib.stride_tricks.sliding_window_view(padded, window, axis=1)
    counts = np.minimum(np.arange(1, k + 1), window)
    return np.nansum(win, axis=2) / counts


# -- constant-velocity Kalman filter (one axis) ------------------------------


@njit
def _kalman_cv_numba(z, q, r):
    k = z.shape[0]
    out = np.empty(k)
    # state [pos, vel]; F = [[1, 1], [0, 1]]; white-noise-acceleration Q
    x0 = z[0]
    x1 = 0.0
    p00 = 1.0
    p01 = 0.0
    p11 = 1.0
    q00 = 0.25 * q
    q01 = 0.5 * q
    q11 = q
    for t in range(k):
        if t > 0:
            x0 = x0 + x1
            n00 = p00 + 2.0 * p01 + p11 + q00
            n01 = p01 + p11 + q01
            n11 = p11 + q11
            p00 = n00
            p01 = n01
            p11 = n11
        s = p00 + r
        k0 = p00 / s
        k1 = p01 / s
        innov = z[t] - x0
        x0 = x0 + k0 * innov
        x1 = x1 + k1 * innov
        n00 = (1.0 - k0) * p00
        n01 = (1.0 - k0) * p01
        n11 = p11 - k1 * p01
        p00 = n00
        p01 = n01
        p11 = n11
        out[t] = x0
    return out


def _kalman_cv_numpy(z, q, r):
    F = np.array([[1.0, 1.0], [0.0, 1.0]])
    Q = q * np.array([[0.25, 0.5], [0.5, 1.0]])
    x = np.array([z[0], 0.0])
    P = np.eye(2)
    out = np.empty(len(z))
    for t in range(len(z)):
        if t > 0:
            x = F @ x
            P = F @ P @ F.T + Q
        gain = P[:, 0] / (P[0, 0] + r)
        x = x + gain * (z[t] - x[0])
        P = P - np.outer(gain, P[0, :])
        out[t] = x[0]
    return out


# -- first-order actuator ---------------------------------------------------


@njit
def _actuator_numba(force_cmd, pos_cmd, f0, p0, a, gain, max_step, noise):
    k = force_cmd.shape[0]
    f_out = np.empty(k)
    p_out = np.empty((2, k))
    f = f0
    px = p0[0]
    py = p0[1]
    for j in range(k):
        f = f + a * (gain * force_cmd[j] - f) + noise[j]
        if f < 0.0:
            f = 0.0
        dx = pos_cmd[0, j] - px
        dy = pos_cmd[1, j] - py
        dist = np.sqrt(dx * dx + dy * dy)
        if dist > max_step:
            scale = max_step / dist
            dx *= scale
            dy *= scale
            px += dx
            py += dy
        else:
            px = pos_cmd[0, j]
            py = pos_cmd[1, j]
        f_out[j] = f
        p_out[0, j] = px
        p_out[1, j] = py
    return f_out, p_out


def _actuator_numpy(force_cmd, pos_cmd, f0, p0, a, gain, max_step, noise):
    # the recursion is inherently sequential; this is the reference loop
    k = force_cmd.shape[0]
    f_out = np.empty(k)
    p_out = np.empty((2, k))
    f = float(f0)
    p = np.array(p0, dtype=float)
    for j in range(k):
        f = max(f + a * (gain * force_cmd[j] - f) + noise[j], 0.0)
        delta = pos_cmd[:, j] - p
        dist = np.hypot(delta[0], delta[1])
        if dist > max_step:
            p = p + delta * (max_step / dist)
        else:
            p = pos_cmd[:, j].copy()
        f_out[j] = f
        p_out[:, j] = p
    return f_out, p_out


IMPLEMENTATIONS = {
    "numba": {
        "mu_fit": _mu_fit_numba,
        "objective": _residual_numba,
        "moving_average": _moving_average_numba,
        "kalman_cv": _kalman_cv_numba,
        "actuator": _actuator_numba,
    },
    "numpy": {
        "mu_fit": _mu_fit_numpy,
        "objective": _objective_numpy,
        "moving_average": _moving_average_numpy,
        "kalman_cv": _kalman_cv_numpy,
        "actuator": _actuator_numpy,
    },
}

_active = IMPLEMENTATIONS[BACKEND]
mu_fit = _active["mu_fit"]
objective = _active["objective"]
moving_average = _active["moving_average"]
kalman_cv = _active["kalman_cv"]
actuator = _active["actuator"]
