import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kinosyn.errors import NonFiniteError, ParameterError, StructuralError
from kinosyn.preprocess import (
    PreprocessConfig,
    RawTrial,
    concatenate_trials,
    kalman_smooth,
    moving_average,
    preprocess_trials,
    rectify,
    resample,
    split_trials,
    sum_pressure,
)
from kinosyn.signal_model import (
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def emg(rows):
    return EmgMatrix(np.array(rows, dtype=float))


# -- rectify ------------------------------------------------------------------------


def test_rectify_examples():
    np.testing.assert_array_equal(rectify(emg([[-1, 2], [0, -3]])).data, [[1, 2], [0, 3]])
    np.testing.assert_array_equal(rectify(emg(np.zeros((2, 3)))).data, np.zeros((2, 3)))
    pos = np.abs(np.random.default_rng(0).normal(size=(3, 4)))
    np.testing.assert_array_equal(rectify(EmgMatrix(pos)).data, pos)


def test_rectify_names_bad_index():
    with pytest.raises(NonFiniteError) as exc:
        rectify(emg([[1, 2], [3, np.inf]]))
    assert exc.value.index == (1, 1)


@given(arrays(float, (3, 6), elements=finite))
def test_rectify_idempotent(x):
    once = rectify(EmgMatrix(x))
    np.testing.assert_array_equal(rectify(once).data, once.data)


# -- moving average ---------------------------------------------------------------------


def test_moving_average_examples():
    x = emg([[0, 4, 8]])
    np.testing.assert_array_equal(moving_average(x, 1).data, x.data)
    np.testing.assert_allclose(moving_average(x, 2).data, [[0, 2, 6]])


@given(st.floats(0, 1e3), st.integers(1, 30), st.integers(30, 80))
def test_moving_average_keeps_constants(v, w, k):
    out = moving_average(EmgMatrix(np.full((2, k), v)), w).data
    np.testing.assert_allclose(out, v, rtol=1e-12)


@given(arrays(float, (2, 25), elements=st.floats(0, 100)), st.integers(1, 25))
def test_moving_average_non_negative(x, w):
    assert np.all(moving_average(EmgMatrix(x), w).data >= 0)


@pytest.mark.parametrize("w", [0, 4])
def test_moving_average_window_bounds(w):
    with pytest.raises(ParameterError):
        moving_average(emg([[1, 2, 3]]), w)


# -- pressure --------------------------------------------------------------------------


def test_sum_pressure_examples():
    assert sum_pressure(PressureFrameSequence(np.zeros((1, 16, 10)))).values.tolist() == [0]
    assert sum_pressure(PressureFrameSequence(np.ones((1, 16, 10)))).values.tolist() == [160.0]
    frames = np.array([[[1, 2], [3, 4]], [[0, 0], [0, 5]]], dtype=float)
    assert sum_pressure(PressureFrameSequence(frames)).values.tolist() == [10, 5]


def test_sum_pressure_empty():
    with pytest.raises(ParameterError):
        sum_pressure(PressureFrameSequence(np.zeros((0, 2, 2))))


# -- Kalman ---------------------------------------------------------------------------------


def test_kalman_constant_converges():
    c = 0.37
    out = kalman_smooth(PositionTrace(np.full((2, 150), c)), 1e-3, 1e-2).points
    assert abs(out[0, -1] - c) < 1e-3 * abs(c)
    assert out.shape == (2, 150)


def test_kalman_tracks_measurements_as_r_shrinks():
    rng = np.random.default_rng(3)
    z = np.vstack([np.cumsum(rng.normal(0, 0.02, 200)), np.sin(np.linspace(0, 6, 200))])
    devs = []
    for r in [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6]:
        out = kalman_smooth(PositionTrace(z), 1e-3, r).points
        devs.append(np.max(np.abs(out - z)))
    assert all(b < a for a, b in zip(devs, devs[1:]))
    assert devs[-1] < 1e-3


def test_kalman_reduces_noise_on_constant():
    rng = np.random.default_rng(11)
    z = 1.0 + rng.normal(0, 0.1, (2, 500))
    out = kalman_smooth(PositionTrace(z), 1e-3, 1e-2).points
    assert np.all(out.var(axis=1) < z.var(axis=1))


def test_kalman_rejects_bad_input():
    with pytest.raises(ParameterError):
        kalman_smooth(PositionTrace(np.zeros((2, 3))), 0, 1)
    with pytest.raises(NonFiniteError):
        kalman_smooth(PositionTrace([[0, np.nan], [0, 0]]), 1, 1)


# -- resample ---------------------------------------------------------------------------------


def test_resample_examples():
    x = np.array([[1.0, 5.0, 2.0]])
    np.testing.assert_array_equal(resample(x, 3), x)
    np.testing.assert_allclose(resample(np.array([0.0, 1.0]), 3), [0, 0.5, 1])
    np.testing.assert_allclose(resample(np.array([1.0, 3.0, 5.0]), 5), [1, 2, 3, 4, 5])


@given(st.floats(-10, 10), st.floats(-10, 10), st.integers(2, 60), st.integers(2, 200))
def test_resample_exact_on_affine(a, b, k, target):
    t = np.linspace(0, 1, k)
    out = resample(a + b * t, target)
    np.testing.assert_allclose(out, a + b * np.linspace(0, 1, target), atol=1e-12)
    assert out[0] == a + b * 0.0
    assert out[-1] == (a + b * t)[-1]


@given(arrays(float, (2, 9), elements=st.floats(0, 10)), st.integers(2, 40))
def test_resample_keeps_non_negativity_and_ends(x, target):
    out = resample(EmgMatrix(x), target).data
    assert np.all(out >= 0)
    np.testing.assert_array_equal(out[:, 0], x[:, 0])
    np.testing.assert_array_equal(out[:, -1], x[:, -1])


def test_resample_needs_two_samples():
    with pytest.raises(ParameterError):
        resample(np.array([1.0]), 4)


# -- concatenate ---------------------------------------------------------------------------------


def _trial(data):
    data = np.asarray(data, dtype=float)
    k = data.shape[1]
    return Trial(EmgMatrix(data), ForceTrace(np.arange(k, dtype=float)),
                 PositionTrace(np.zeros((2, k))))


def test_concatenate_examples():
    one = TrialSet((_trial([[1, 2]]),))
    np.testing.assert_array_equal(concatenate_trials(one)[0].data, [[1, 2]])
    two = TrialSet((_trial([[1], [2]]), _trial([[3], [4]])))
    np.testing.assert_array_equal(concatenate_trials(two)[0].data, [[1, 3], [2, 4]])


def test_concatenate_rejects_length_mismatch():
    bad = Trial(EmgMatrix(np.ones((1, 3))), ForceTrace(np.ones(2)), PositionTrace(np.zeros((2, 3))))
    with pytest.raises(StructuralError):
        concatenate_trials(TrialSet((bad,)))


@settings(max_examples=50)
@given(st.lists(st.integers(1, 20), min_size=1, max_size=8), st.integers(0, 2**31))
def test_split_then_concatenate_is_identity(lengths, seed):
    rng = np.random.default_rng(seed)
    k = sum(lengths)
    m = EmgMatrix(rng.random((3, k)))
    f = ForceTrace(rng.random(k))
    p = PositionTrace(rng.normal(size=(2, k)))
    e2, f2, p2 = concatenate_trials(split_trials(m, f, p, lengths))
    np.testing.assert_array_equal(e2.data, m.data)
    np.testing.assert_array_equal(f2.values, f.values)
    np.testing.assert_array_equal(p2.points, p.points)


def test_paper_scale_concatenation():
    rng = np.random.default_rng(0)
    raws = [RawTrial(EmgMatrix(rng.normal(size=(16, 120 + 3 * i))),
                     PressureFrameSequence(rng.random((120 + 3 * i, 16, 10))),
                     PositionTrace(rng.normal(size=(2, 120 + 3 * i))))
            for i in range(10)]
    pre = preprocess_trials(raws, PreprocessConfig(total_len=939))
    assert pre.emg.data.shape == (16, 939)
    assert len(pre.force) == 939 and len(pre.position) == 939
    assert np.all(pre.emg.data >= 0)
    assert pre.lengths == (94,) * 9 + (93,)


def test_default_target_length():
    assert PreprocessConfig().target_len == 94
    with pytest.raises(ParameterError):
        PreprocessConfig(ma_window=0)
    with pytest.raises(ParameterError):
        PreprocessConfig(kalman_r=0)
