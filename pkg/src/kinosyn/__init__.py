"""Muscle-synergy kinodynamic command pipeline.

sEMG -> non-negative synergies -> force-correlated activation -> force and
position commands -> simulated end-effector.
"""

from ._accel import BACKEND
from .errors import (
    DataParseError,
    DegenerateInputError,
    KinosynError,
    NonFiniteError,
    ParameterError,
    StructuralError,
)
from .nmf import NmfOptions, OrderSelection, SynergySet, factorize, select_order, vaf
from .preprocess import (
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
from .signal_model import (
    ChannelLayout,
    Condition,
    EmgMatrix,
    ForceTrace,
    PositionTrace,
    PressureFrameSequence,
    Trial,
    TrialSet,
    validate,
)
from .simulator import ActuatorModel, SimResult, compare_traces, run, step
from .synergy import (
    CommandStream,
    ForceSynergySelection,
    build_command_stream,
    force_command,
    normalize_interchannel,
    position_command,
    select_force_synergy,
)
from .synthgen import SynthDataset, SynthSpec, generate, match_synergies

__version__ = "0.1.0"
