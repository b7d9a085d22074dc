"""Rotation-symmetric bosonic codes: error propagation, correction and distance."""
from ._backend import BACKEND
from .codes import (
    AmplitudeProfile,
    RotationCode,
    logical_state,
    make_binomial_profile,
    make_cat_profile,
    make_code,
    make_codewords,
    make_contrived_profile,
    make_ideal_profile,
)
from .errors import ErrorLabel, make_error
from .fock import DimensionError
from .gates import GateSpec, make_gate, verify_logical_action
from .propagation import predict, verify
from .qec import ChannelPrior, InformationDestroyed, monte_carlo, run_direct, run_teleport
from .distance import kl_block, verify_tradeoff

__version__ = "0.1.0"
