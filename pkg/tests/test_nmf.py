import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinosyn.errors import DegenerateInputError, ParameterError, StructuralError
from kinosyn.nmf import NmfOptions, factorize, select_order, vaf
from kinosyn.signal_model import EmgMatrix
from kinosyn.synthgen import match_synergies

FAST = NmfOptions(restarts=3, max_iters=1500, seed=4)


def _vaf_loops(M, W, C):
    num = den = 0.0
    for i in range(M.shape[0]):
        for j in range(M.shape[1]):
            est = sum(W[i, a] * C[a, j] for a in range(W.shape[1]))
            num += (M[i, j] - est) ** 2
            den += M[i, j] ** 2
    return 1 - num / den


def test_vaf_examples(rng):
    W, C = rng.random((4, 2)), rng.random((2, 6))
    assert vaf(W @ C, W, C) == 1.0
    M = rng.random((4, 6))
    assert vaf(M, np.zeros((4, 2)), np.zeros((2, 6))) == 0.0
    assert vaf(np.array([[2.0]]), np.array([[1.0]]), np.array([[1.0]])) == 0.75


def test_vaf_matches_loop_oracle(rng):
    M, W, C = rng.random((5, 8)), rng.random((5, 2)), rng.random((2, 8))
    assert vaf(M, W, C) == pytest.approx(_vaf_loops(M, W, C), rel=1e-12)


def test_vaf_errors():
    with pytest.raises(DegenerateInputError):
        vaf(np.zeros((2, 2)), np.ones((2, 1)), np.ones((1, 2)))
    with pytest.raises(StructuralError):
        vaf(np.ones((2, 2)), np.ones((3, 1)), np.ones((1, 2)))


@settings(max_examples=25)
@given(st.integers(0, 2**31), st.lists(st.floats(0.01, 100), min_size=3, max_size=3))
def test_vaf_invariant_under_diagonal_rescaling(seed, diag):
    rng = np.random.default_rng(seed)
    M, W, C = rng.random((6, 20)), rng.random((6, 3)), rng.random((3, 20))
    D = np.diag(diag)
    assert abs(vaf(M, W @ D, np.linalg.inv(D) @ C) - vaf(M, W, C)) < 1e-10


def test_rank_one_exact(rng):
    w, c = rng.random((16, 1)), rng.random((1, 50))
    fit = factorize(EmgMatrix(w @ c), 1, FAST)
    assert fit.vaf >= 0.999
    assert fit.W.shape == (16, 1) and fit.C.shape == (1, 50)


def test_noiseless_rank_three_recovery(rng):
    W_true = rng.random((16, 3)) ** 4  # peaky columns keep the problem identifiable
    C_true = rng.random((3, 939)) ** 4
    fit = factorize(W_true @ C_true, 3, NmfOptions(restarts=5, seed=1))
    _, cos = match_synergies(W_true, fit.W)
    assert fit.vaf >= 0.99
    assert cos.min() >= 0.95


def test_objective_never_increases(rng):
    fit = factorize(rng.random((16, 300)), 4, NmfOptions(restarts=3, max_iters=400, tol=1e-12))
    for hist in fit.histories:
        assert np.all(np.diff(hist) <= 1e-10 * hist[:-1])


def test_best_restart_wins(rng):
    M = rng.random((8, 60))
    fit = factorize(M, 2, NmfOptions(restarts=6, seed=9, max_iters=200))
    finals = [h[-1] for h in fit.histories]
    assert fit.final_objective == min(finals)
    assert fit.restart == finals.index(min(finals))
    assert fit.final_objective == pytest.approx(np.sum((M - fit.W @ fit.C) ** 2), rel=1e-10)
    assert fit.vaf == pytest.approx(vaf(M, fit.W, fit.C), abs=1e-14)


def test_factors_stay_non_negative(rng):
    M = rng.random((10, 80))
    M[:, ::7] = 0.0
    fit = factorize(M, 5, FAST)
    assert np.all(fit.W >= 0) and np.all(fit.C >= 0)
    assert np.all(np.isfinite(fit.W)) and np.all(np.isfinite(fit.C))


def test_bit_reproducible(rng):
    M = rng.random((16, 120))
    a = factorize(M, 3, FAST)
    b = factorize(M, 3, FAST)
    assert a.W.tobytes() == b.W.tobytes() and a.C.tobytes() == b.C.tobytes()


def test_full_order_beats_smaller_orders(rng):
    W, C = rng.random((6, 3)), rng.random((3, 100))
    M = W @ C + 0.05 * rng.random((6, 100))
    opts = NmfOptions(restarts=8, max_iters=3000, tol=1e-9, seed=2)
    vafs = [factorize(M, n, opts).vaf for n in range(1, 7)]
    assert all(vafs[-1] >= v - 1e-9 for v in vafs)


def test_factorize_errors():
    with pytest.raises(DegenerateInputError):
        factorize(np.zeros((3, 4)), 1)
    with pytest.raises(ParameterError):
        factorize(np.ones((3, 4)), 4)
    with pytest.raises(StructuralError):
        factorize(-np.ones((3, 4)), 1)


def test_options_validated():
    for kw in ({"max_iters": 0}, {"tol": 0}, {"restarts": 0}, {"epsilon": 0}):
        with pytest.raises(ParameterError):
            NmfOptions(**kw)


def test_select_order_rank_one(rng):
    M = rng.random((16, 1)) @ rng.random((1, 60))
    sel = select_order(M, 0.9, FAST)
    n, fit = sel
    assert n == 1 and sel.reached and fit.vaf >= 0.9
    assert list(sel.vaf_by_order) == [1]


def test_select_order_flags_unreached_threshold(rng):
    M = rng.random((3, 40))
    sel = select_order(M, 0.999999, NmfOptions(restarts=1, max_iters=50))
    assert sel.n == 3 and not sel.reached
    assert list(sel.vaf_by_order) == [1, 2, 3]
