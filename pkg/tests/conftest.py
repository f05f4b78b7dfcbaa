import functools

import numpy as np
import pytest

from kinosyn import synthgen
from kinosyn.nmf import NmfOptions, factorize
from kinosyn.preprocess import PreprocessConfig, RawTrial, preprocess_trials

ACCEPTANCE_LINES = []


@functools.lru_cache(maxsize=None)
def synthetic_session(seed: int, snr_db: float = 20.0, force_index: int = 1):
    """Default synthetic session, preprocessed to the 16 x 939 paper shape."""
    ds = synthgen.generate(synthgen.SynthSpec(seed=seed, noise_snr_db=snr_db,
                                              force_synergy_index=force_index))
    raws = [RawTrial(t.emg, p, t.position, t.condition)
            for t, p in zip(ds.trial_set, ds.pressure)]
    pre = preprocess_trials(raws, PreprocessConfig(total_len=939))
    return ds, pre


@functools.lru_cache(maxsize=None)
def fitted_session(seed: int, n: int = 3):
    ds, pre = synthetic_session(seed)
    return factorize(pre.emg, n, NmfOptions(restarts=10, seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
