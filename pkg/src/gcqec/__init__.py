"""Error correction under global control: circuits, pulse compiler, labels and device cycle."""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .codes import SHOR, STEANE, Circuit, CodeSpec, get_code
from .compiler import compile, compile_code, ec_cycle_pulses
from .core import ChainLayout, CostModel, PulseProgram, load_config
from .labels import comparator_program, hierarchy_labels, supercu_labels
from .orchestrator import DeviceState, NoiseModel, monte_carlo_sweep, run_cycle, stabilize
from .qsim import Gate, StateVector

__all__ = [
    "SHOR", "STEANE", "ChainLayout", "Circuit", "CodeSpec", "CostModel", "DeviceState", "Gate",
    "NoiseModel", "PulseProgram", "StateVector", "comparator_program", "compile", "compile_code",
    "ec_cycle_pulses", "get_code", "hierarchy_labels", "load_config", "monte_carlo_sweep",
    "run_cycle", "stabilize", "supercu_labels",
]
