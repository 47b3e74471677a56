"""Three-step SWAP gate from invariant-engineered shortcuts and Zeno dynamics in cavity QED."""

from .hilbert import AtomLevel, BasisState, HilbertSpace, TruncationError
from .pulses import AngleSchedule, PhaseRecord, PulseSchedule, lr_phase, protocol_pulses
from .config import NoiseModel, ProtocolConfig
from .protocol import calibrate_signs, extract_gate, ideal_states, run_protocol, sweep

__all__ = [
    "AtomLevel",
    "BasisState",
    "HilbertSpace",
    "TruncationError",
    "AngleSchedule",
    "PhaseRecord",
    "PulseSchedule",
    "lr_phase",
    "protocol_pulses",
    "NoiseModel",
    "ProtocolConfig",
    "calibrate_signs",
    "extract_gate",
    "ideal_states",
    "run_protocol",
    "sweep",
]

__version__ = "0.1.0"
